//! Bipartite author-factor graph export in Pajek formats, plus the
//! human-readable summary.
//!
//! File grammar, all UTF-8 with LF endings:
//! - `.net`: `*Vertices N`, then `id "label" box|ellipse` per vertex
//!   (authors are boxes, factors ellipses), then `*Edges`, then
//!   `src dst weight` lines with 4 decimal places;
//! - `.clu`: `*Vertices N`, then one cluster number per vertex;
//! - `.vec`: `*Vertices N`, then one size per vertex, max-normalized to
//!   1.0, 4 decimal places.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::factors::{FactorReport, FactorSolution};
use crate::ioutil::fmt_fixed;
use crate::mentions::ProfileSet;

/// An author node: display size is its total mention count.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthorNode {
    pub lemma: String,
    pub mentions_total: u64,
    /// 1-based index of the assigned factor.
    pub factor: usize,
}

/// A factor node: display size is the sum of members' mentions weighted by
/// their absolute loading on the factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorNode {
    pub index: usize,
    pub weighted_size: f64,
}

/// An author-factor edge with the display weight (absolute loading,
/// clamped to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub author: String,
    pub factor: usize,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct GraphSpec {
    authors: Vec<AuthorNode>,
    factors: Vec<FactorNode>,
    edges: Vec<GraphEdge>,
}

impl GraphSpec {
    pub fn authors(&self) -> &[AuthorNode] {
        &self.authors
    }

    pub fn factors(&self) -> &[FactorNode] {
        &self.factors
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }
}

/// Builds the display graph. Only assigned authors appear, and only those
/// with at least one loading surviving `display_threshold` after clamping;
/// cross-loadings of displayed authors onto other factors become edges too.
pub fn build_graph(
    solution: &FactorSolution,
    report: &FactorReport,
    profiles: &ProfileSet,
    display_threshold: f64,
) -> GraphSpec {
    let pattern = solution.pattern();
    let mut authors = Vec::new();
    let mut edges = Vec::new();
    for (i, lemma) in solution.labels().iter().enumerate() {
        let Some(factor) = report.assignment(lemma) else {
            continue;
        };
        let mut author_edges = Vec::new();
        for j in 0..solution.k() {
            let weight = pattern.get(i, j).abs().min(1.0);
            if weight >= display_threshold && weight > 0.0 {
                author_edges.push(GraphEdge {
                    author: lemma.clone(),
                    factor: j + 1,
                    weight,
                });
            }
        }
        if author_edges.is_empty() {
            continue;
        }
        let profile = profiles.get(lemma).expect("labels come from profiles");
        authors.push(AuthorNode {
            lemma: lemma.clone(),
            mentions_total: profile.total(),
            factor,
        });
        edges.extend(author_edges);
    }
    let factors = (1..=solution.k())
        .map(|index| {
            let row = &report.rows()[index - 1];
            let weighted_size = row
                .members()
                .iter()
                .map(|(lemma, loading)| {
                    let mentions = profiles.get(lemma).expect("member has a profile").total();
                    mentions as f64 * loading.abs()
                })
                .sum();
            FactorNode {
                index,
                weighted_size,
            }
        })
        .collect();
    GraphSpec {
        authors,
        factors,
        edges,
    }
}

/// Writes `<prefix>.net`, `<prefix>.clu`, and `<prefix>.vec`. Vertex ids
/// are authors in lemma order followed by factors F1..Fk. Fails with
/// "no displayable nodes" when no author survived the display threshold.
pub fn write_pajek(graph: &GraphSpec, out_prefix: &Path) -> Result<Vec<PathBuf>> {
    if graph.authors().is_empty() {
        return Err(Error::EmptyGraph);
    }
    let vertex_count = graph.authors().len() + graph.factors().len();
    let author_id = |lemma: &str| -> usize {
        graph
            .authors()
            .iter()
            .position(|a| a.lemma == lemma)
            .expect("edge author is a node")
            + 1
    };
    let factor_id = |index: usize| graph.authors().len() + index;

    let open = |extension: &str| -> Result<(PathBuf, BufWriter<File>)> {
        let path = out_prefix.with_extension(extension);
        let file = File::create(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        Ok((path, BufWriter::new(file)))
    };
    let finish = |path: &Path, mut w: BufWriter<File>| -> Result<()> {
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    };
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source: std::io::Error| Error::Io { path, source }
    };

    let (net_path, mut net) = open("net")?;
    (|| -> std::io::Result<()> {
        writeln!(net, "*Vertices {vertex_count}")?;
        for (i, author) in graph.authors().iter().enumerate() {
            writeln!(net, "{} \"{}\" box", i + 1, author.lemma)?;
        }
        for factor in graph.factors() {
            writeln!(net, "{} \"F{}\" ellipse", factor_id(factor.index), factor.index)?;
        }
        writeln!(net, "*Edges")?;
        for edge in graph.edges() {
            writeln!(
                net,
                "{} {} {}",
                author_id(&edge.author),
                factor_id(edge.factor),
                fmt_fixed(edge.weight, 4)
            )?;
        }
        Ok(())
    })()
    .map_err(io_err(&net_path))?;
    finish(&net_path, net)?;

    let (clu_path, mut clu) = open("clu")?;
    (|| -> std::io::Result<()> {
        writeln!(clu, "*Vertices {vertex_count}")?;
        for author in graph.authors() {
            writeln!(clu, "{}", author.factor)?;
        }
        for factor in graph.factors() {
            writeln!(clu, "{}", factor.index)?;
        }
        Ok(())
    })()
    .map_err(io_err(&clu_path))?;
    finish(&clu_path, clu)?;

    let mut sizes: Vec<f64> = graph
        .authors()
        .iter()
        .map(|a| a.mentions_total as f64)
        .collect();
    sizes.extend(graph.factors().iter().map(|f| f.weighted_size));
    let max = sizes.iter().fold(0.0f64, |m, &x| m.max(x));
    if max <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let (vec_path, mut vec_file) = open("vec")?;
    (|| -> std::io::Result<()> {
        writeln!(vec_file, "*Vertices {vertex_count}")?;
        for size in &sizes {
            // Pajek sizes must be positive; floor at the smallest value
            // representable with 4 decimals.
            let normalized = (size / max).max(0.0001);
            writeln!(vec_file, "{}", fmt_fixed(normalized, 4))?;
        }
        Ok(())
    })()
    .map_err(io_err(&vec_path))?;
    finish(&vec_path, vec_file)?;

    Ok(vec![net_path, clu_path, vec_path])
}

/// Writes the factor table plus graph statistics as readable text.
pub fn write_summary<W: Write>(
    report: &FactorReport,
    graph: &GraphSpec,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "factors: {}", report.rows().len())?;
    writeln!(w, "factor\tmax_loading\tsize\tmembers")?;
    for row in report.rows() {
        let members: Vec<&str> = row.members().iter().map(|(l, _)| l.as_str()).collect();
        writeln!(
            w,
            "F{}\t{}\t{}\t{}",
            row.index(),
            fmt_fixed(row.max_loading(), 6),
            row.size(),
            members.join(", ")
        )?;
    }
    writeln!(
        w,
        "unassigned ({}): {}",
        report.unassigned().len(),
        report.unassigned().join(", ")
    )?;
    writeln!(w, "author nodes: {}", graph.authors().len())?;
    writeln!(w, "factor nodes: {}", graph.factors().len())?;
    writeln!(w, "edges: {}", graph.edges().len())?;
    if let Some(largest) = graph
        .authors()
        .iter()
        .max_by(|a, b| {
            a.mentions_total
                .cmp(&b.mentions_total)
                .then_with(|| b.lemma.cmp(&a.lemma))
        })
    {
        writeln!(
            w,
            "largest author node: {} ({} mentions)",
            largest.lemma, largest.mentions_total
        )?;
    }
    Ok(())
}
