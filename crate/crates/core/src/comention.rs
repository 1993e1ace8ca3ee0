//! The weighted author × author co-mention matrix.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ioutil::{data_lines, format_error, read_text};
use crate::mentions::{MentionProfile, ProfileSet};

/// Symmetric co-mention counts with a missing diagonal. Diagonal cells are
/// not meaningful data; accessors return `None` there and the CSV export
/// writes an empty field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComentionMatrix {
    labels: Vec<String>,
    n: usize,
    cells: Vec<u64>,
}

impl ComentionMatrix {
    /// Assembles a matrix from off-diagonal cells (`None` marks the
    /// diagonal), validating shape, symmetry, and label order.
    pub fn from_parts(labels: Vec<String>, rows: Vec<Vec<Option<u64>>>) -> Result<Self> {
        let n = labels.len();
        let fail = |message: &str| Error::Format {
            path: Default::default(),
            line: 0,
            message: message.to_string(),
        };
        if n < 2 {
            return Err(Error::TooFewProfiles { found: n });
        }
        for pair in labels.windows(2) {
            if pair[0] >= pair[1] {
                return Err(fail("labels must be unique and sorted ascending"));
            }
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(fail("matrix shape does not match labels"));
        }
        let mut cells = vec![0u64; n * n];
        for (i, row) in rows.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                match (i == j, cell) {
                    (true, None) => {}
                    (true, Some(_)) => return Err(fail("diagonal must be missing")),
                    (false, Some(v)) => cells[i * n + j] = *v,
                    (false, None) => return Err(fail("off-diagonal cell missing")),
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if cells[i * n + j] != cells[j * n + i] {
                    return Err(fail("matrix is not symmetric"));
                }
            }
        }
        Ok(ComentionMatrix { labels, n, cells })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Off-diagonal count, or `None` on the missing diagonal.
    pub fn get(&self, i: usize, j: usize) -> Option<u64> {
        assert!(i < self.n && j < self.n, "index out of range");
        if i == j {
            None
        } else {
            Some(self.cells[i * self.n + j])
        }
    }
}

/// Co-mention count of two authors: the size of the multiset intersection
/// of their mention profiles, computed as `Σ_d min(a_d, b_d)`.
pub fn comention_count(a: &MentionProfile, b: &MentionProfile) -> Result<u64> {
    if a.lemma() == b.lemma() {
        return Err(Error::SameLemma {
            lemma: a.lemma().to_string(),
        });
    }
    // Walk the smaller profile; absent doc ids count as zero.
    let (small, large) = if a.counts().len() <= b.counts().len() {
        (a, b)
    } else {
        (b, a)
    };
    Ok(small
        .counts()
        .iter()
        .map(|(doc_id, &count)| count.min(large.count_in(doc_id)))
        .sum())
}

/// Builds the full matrix over all profile pairs.
pub fn build_matrix(profiles: &ProfileSet) -> Result<ComentionMatrix> {
    let n = profiles.len();
    if n < 2 {
        return Err(Error::TooFewProfiles { found: n });
    }
    let items = profiles.profiles();
    let labels: Vec<String> = items.iter().map(|p| p.lemma().to_string()).collect();
    let mut cells = vec![0u64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let count = comention_count(&items[i], &items[j])?;
            cells[i * n + j] = count;
            cells[j * n + i] = count;
        }
    }
    Ok(ComentionMatrix { labels, n, cells })
}

/// Writes the matrix as CSV: first row/column carry labels, diagonal cells
/// are empty fields (two adjacent commas).
pub fn write_matrix_csv<W: Write>(matrix: &ComentionMatrix, mut w: W) -> std::io::Result<()> {
    writeln!(w, ",{}", matrix.labels().join(","))?;
    for i in 0..matrix.n() {
        let mut line = matrix.labels()[i].clone();
        for j in 0..matrix.n() {
            line.push(',');
            if let Some(v) = matrix.get(i, j) {
                line.push_str(&v.to_string());
            }
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Reads a matrix CSV back, validating labels and symmetry.
pub fn read_matrix_csv(path: &Path) -> Result<ComentionMatrix> {
    let text = read_text(path)?;
    let mut lines = data_lines(&text);
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| format_error(path, 1, "empty matrix file"))?;
    let Some(label_row) = header.strip_prefix(',') else {
        return Err(format_error(
            path,
            line_no,
            "matrix header must start with an empty corner field",
        ));
    };
    let labels: Vec<String> = label_row.split(',').map(String::from).collect();
    let n = labels.len();
    let mut rows = Vec::with_capacity(n);
    for (line, row) in lines {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != n + 1 {
            return Err(format_error(
                path,
                line,
                format!("expected {} fields, found {}", n + 1, fields.len()),
            ));
        }
        if fields[0] != labels[rows.len()] {
            return Err(format_error(
                path,
                line,
                format!("row label '{}' does not match column label", fields[0]),
            ));
        }
        let mut cells = Vec::with_capacity(n);
        for field in &fields[1..] {
            if field.is_empty() {
                cells.push(None);
            } else {
                let v: u64 = field.parse().map_err(|_| {
                    format_error(path, line, format!("invalid cell '{field}'"))
                })?;
                cells.push(Some(v));
            }
        }
        rows.push(cells);
    }
    ComentionMatrix::from_parts(labels, rows)
}
