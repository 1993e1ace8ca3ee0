//! The pipeline stages. Each stage reads its predecessor's artifact files
//! rather than recomputing, so the manual curation loop (edit the exclude
//! file, rerun from `lexicon`) stays cheap. Partial outputs are removed
//! when a stage fails.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use comention_core::comention::{build_matrix, read_matrix_csv, write_matrix_csv};
use comention_core::corpus::{load_corpus, Corpus};
use comention_core::export::{build_graph, write_pajek, write_summary};
use comention_core::factors::{
    correlation_matrix, eigen_spectrum, extract_loadings, factor_report, fill_diagonal_mean,
    oblimin_rotate, read_loadings_csv, read_phi_csv, read_report_tsv, select_k,
    write_loadings_csv, write_phi_csv, write_report_tsv, write_scree, FactorCountMode,
    FactorSolution, ObliminOptions,
};
use comention_core::lexicon::{
    build_lexicon, load_candidates, read_lexicon_file, write_lexicon_file, Thresholds,
};
use comention_core::mentions::{
    build_profiles, filter_min_mentions, read_profile_dump, write_profile_dump, ProfileSet,
};

use crate::config::{FactorMode, PipelineConfig, Stage};
use crate::CliError;

/// A stage that completed but produced a degenerate result the operator
/// should look at (exit code 4).
#[derive(Debug, Default)]
pub struct Warnings(pub Vec<String>);

pub struct StageRunner<'a> {
    config: &'a PipelineConfig,
    header: String,
    written: Vec<PathBuf>,
}

impl<'a> StageRunner<'a> {
    pub fn new(config: &'a PipelineConfig) -> Self {
        let header = format!(
            "# comention {} config={}",
            env!("CARGO_PKG_VERSION"),
            config.hash()
        );
        StageRunner {
            config,
            header,
            written: Vec::new(),
        }
    }

    fn prepare_output_dir(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(self.config.output_dir()).map_err(|e| {
            CliError::Data(format!(
                "cannot create output directory {}: {e}",
                self.config.output_dir().display()
            ))
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.config.output_dir().join(name)
    }

    /// Writes one artifact with the provenance header line.
    fn artifact<F>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.path(name);
        self.written.push(path.clone());
        let write = || -> std::io::Result<()> {
            let mut w = BufWriter::new(File::create(&path)?);
            writeln!(w, "{}", self.header)?;
            body(&mut w)?;
            w.flush()
        };
        write().map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
    }

    /// Removes everything written so far; called when a stage fails.
    pub fn cleanup(&self) {
        for path in &self.written {
            let _ = std::fs::remove_file(path);
        }
    }

    fn thresholds(&self) -> Thresholds {
        Thresholds {
            min_length: self.config.min_length,
            min_candidate_freq: self.config.min_candidate_freq,
            min_final_mentions: self.config.min_total_mentions,
        }
    }

    fn load_corpus(&self) -> Result<Corpus, CliError> {
        let corpus_dir = self.config.corpus_dir.as_deref().expect("validated");
        let metadata = self.config.metadata_file.as_deref().expect("validated");
        load_corpus(corpus_dir, metadata).map_err(CliError::from)
    }

    /// Stage 1: build and write the curated lexicon.
    pub fn run_lexicon(&mut self, warnings: &mut Warnings) -> Result<(), CliError> {
        self.prepare_output_dir()?;
        let corpus = self.load_corpus()?;
        let candidates_file = self.config.candidates_file.as_deref().expect("validated");
        let candidates = load_candidates(candidates_file)?;
        let lexicon = build_lexicon(
            &candidates,
            &corpus,
            self.thresholds(),
            self.config.include_file.as_deref(),
            self.config.exclude_file.as_deref(),
        )?;
        self.artifact("lexicon.tsv", |w| write_lexicon_file(&lexicon, w))?;
        if lexicon.is_empty() {
            warnings
                .0
                .push("lexicon is empty: every candidate was pruned or excluded".to_string());
        }
        Ok(())
    }

    /// Stage 2: scan the corpus against the lexicon file and write the
    /// profile dump plus the co-mention matrix.
    pub fn run_matrix(&mut self) -> Result<(), CliError> {
        self.prepare_output_dir()?;
        let corpus = self.load_corpus()?;
        let lexicon = read_lexicon_file(&self.path("lexicon.tsv"), self.thresholds())?;
        let profiles = build_profiles(&corpus, &lexicon);
        let kept = filter_min_mentions(&profiles, self.config.min_total_mentions)?;
        self.artifact("profiles.tsv", |w| write_profile_dump(&kept, w))?;
        let matrix = build_matrix(&kept)?;
        self.artifact("matrix.csv", |w| write_matrix_csv(&matrix, w))?;
        Ok(())
    }

    /// Stage 3: factor the matrix file; write the eigen spectrum, the
    /// unrotated and rotated loadings, factor correlations, the rotation
    /// log, and the membership report.
    pub fn run_factor(&mut self) -> Result<(), CliError> {
        self.prepare_output_dir()?;
        let matrix = read_matrix_csv(&self.path("matrix.csv"))?;
        let profiles = self.read_profiles(matrix.labels())?;
        let filled = fill_diagonal_mean(&matrix);
        let corr = correlation_matrix(&filled)?;
        let spectrum = eigen_spectrum(&corr)?;
        self.artifact("eigenvalues.tsv", |w| write_scree(&spectrum, w))?;
        let k = match self.config.factor_mode {
            FactorMode::Explicit => {
                let k = self.config.k.expect("validated");
                select_k(&spectrum, FactorCountMode::Explicit(k))?
            }
            FactorMode::Kaiser => {
                let k = select_k(&spectrum, FactorCountMode::Kaiser)?;
                if k == 0 {
                    return Err(CliError::Data(
                        "Kaiser's rule found no eigenvalue above 1; rerun with \
                         factor_mode=explicit and an explicit k"
                            .to_string(),
                    ));
                }
                k
            }
        };
        let loadings = extract_loadings(&spectrum, k)?;
        let labels = corr.labels().to_vec();
        self.artifact("loadings.csv", |w| write_loadings_csv(&labels, &loadings, w))?;
        let options = ObliminOptions {
            gamma: self.config.gamma,
            max_iter: self.config.max_iter,
            tol: self.config.tol,
        };
        let solution = oblimin_rotate(&labels, &loadings, &options)?;
        self.artifact("pattern.csv", |w| {
            write_loadings_csv(&labels, solution.pattern(), w)
        })?;
        self.artifact("phi.csv", |w| write_phi_csv(solution.phi(), w))?;
        self.artifact("rotation_log.tsv", |w| {
            writeln!(w, "step\tcriterion")?;
            for (step, criterion) in solution.criterion_history().iter().enumerate() {
                writeln!(w, "{step}\t{criterion:.6}")?;
            }
            writeln!(w, "converged\t{}", solution.converged())?;
            writeln!(w, "iterations\t{}", solution.iterations())
        })?;
        let report = factor_report(&solution, &profiles, self.config.membership_threshold);
        self.artifact("report.tsv", |w| write_report_tsv(&report, w))?;
        Ok(())
    }

    /// Stage 4: rebuild the solution from the factor artifacts and write
    /// the Pajek graph files plus the summary.
    pub fn run_export(&mut self) -> Result<(), CliError> {
        self.prepare_output_dir()?;
        let (labels, pattern) = read_loadings_csv(&self.path("pattern.csv"))?;
        let (unrotated_labels, unrotated) = read_loadings_csv(&self.path("loadings.csv"))?;
        if unrotated_labels != labels {
            return Err(CliError::Data(
                "pattern.csv and loadings.csv disagree on labels".to_string(),
            ));
        }
        let phi = read_phi_csv(&self.path("phi.csv"))?;
        let solution =
            FactorSolution::from_parts(labels.clone(), unrotated, pattern, phi, self.config.gamma);
        let report = read_report_tsv(&self.path("report.tsv"), &labels, solution.pattern())?;
        let profiles = self.read_profiles(&labels)?;
        let graph = build_graph(
            &solution,
            &report,
            &profiles,
            self.config.display_threshold,
        );
        for name in ["graph.net", "graph.clu", "graph.vec"] {
            self.written.push(self.path(name));
        }
        write_pajek(&graph, &self.path("graph"))?;
        self.artifact("summary.txt", |w| write_summary(&report, &graph, w))?;
        Ok(())
    }

    fn read_profiles(&self, labels: &[String]) -> Result<ProfileSet, CliError> {
        let rows = read_profile_dump(&self.path("profiles.tsv"))?;
        Ok(ProfileSet::from_rows(labels, rows, "profiles.tsv")?)
    }
}

/// Runs one stage with cleanup-on-failure and stage-named errors.
pub fn run_stage(
    config: &PipelineConfig,
    stage: Stage,
    warnings: &mut Warnings,
) -> Result<(), CliError> {
    let mut runner = StageRunner::new(config);
    let result = match stage {
        Stage::Lexicon => runner.run_lexicon(warnings),
        Stage::Matrix => runner.run_matrix(),
        Stage::Factor => runner.run_factor(),
        Stage::Export => runner.run_export(),
    };
    if let Err(error) = result {
        runner.cleanup();
        return Err(error.with_stage(stage.name()));
    }
    Ok(())
}

/// Runs the whole pipeline in order, failing fast.
pub fn run_all(config: &PipelineConfig, warnings: &mut Warnings) -> Result<(), CliError> {
    for stage in [Stage::Lexicon, Stage::Matrix, Stage::Factor, Stage::Export] {
        run_stage(config, stage, warnings)?;
    }
    Ok(())
}
