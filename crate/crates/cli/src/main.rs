//! Command-line pipeline for author co-mention analysis.
//!
//! Subcommands run the pipeline stages (`lexicon`, `matrix`, `factor`,
//! `export`) or everything in order (`run`). Each stage writes its
//! artifacts into the output directory and later stages read them back,
//! so curation edits only rerun what changed.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error,
//! 3 numerical failure, 4 completed with warnings.

mod config;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use comention_core::Error as CoreError;
use config::{FactorMode, PipelineConfig, Stage};
use stages::{run_all, run_stage, Warnings};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Data(String),
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Data(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(error: CoreError) -> Self {
        match error {
            CoreError::EigenNoConvergence { .. } | CoreError::SingularTransform => {
                CliError::Numeric(error.to_string())
            }
            other => CliError::Data(other.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn with_stage(self, stage: &str) -> Self {
        let tag = |m: String| format!("stage {stage}: {m}");
        match self {
            CliError::Validation(m) => CliError::Validation(tag(m)),
            CliError::Data(m) => CliError::Data(tag(m)),
            CliError::Numeric(m) => CliError::Numeric(tag(m)),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "comention",
    version,
    about = "Author co-mention analysis: lexicon, co-mention matrix, factor analysis, Pajek export"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    /// Configuration file with `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory all artifacts are written to.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Directory of UTF-8 `.txt` documents.
    #[arg(long)]
    corpus_dir: Option<PathBuf>,
    /// Tab-separated table `filename\tdoc_id\tyear`.
    #[arg(long)]
    metadata_file: Option<PathBuf>,
    /// Tab-separated candidate surnames `surname\tcount`.
    #[arg(long)]
    candidates_file: Option<PathBuf>,
    /// Lemmas to force-add, one per line.
    #[arg(long)]
    include_file: Option<PathBuf>,
    /// Lemmas to drop, one per line.
    #[arg(long)]
    exclude_file: Option<PathBuf>,
    /// Minimum candidate length in characters.
    #[arg(long)]
    min_length: Option<usize>,
    /// Minimum corpus occurrences for a lemma to stay a candidate.
    #[arg(long)]
    min_candidate_freq: Option<u64>,
    /// Minimum total mentions for an author to enter the matrix.
    #[arg(long)]
    min_total_mentions: Option<u64>,
    /// Factor count selection: 'explicit' or 'kaiser'.
    #[arg(long)]
    factor_mode: Option<String>,
    /// Number of factors for --factor-mode explicit.
    #[arg(long)]
    k: Option<usize>,
    /// Oblimin gamma (0 = quartimin).
    #[arg(long)]
    gamma: Option<f64>,
    /// Rotation iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Rotation convergence tolerance on the step change.
    #[arg(long)]
    tol: Option<f64>,
    /// Minimum absolute loading for factor membership.
    #[arg(long)]
    membership_threshold: Option<f64>,
    /// Minimum edge weight drawn in the graph export.
    #[arg(long)]
    display_threshold: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the curated surname lexicon.
    Lexicon(StageArgs),
    /// Scan the corpus and write the co-mention matrix.
    Matrix(StageArgs),
    /// Factor the matrix and write the membership report.
    Factor(StageArgs),
    /// Write Pajek graph files and the summary.
    Export(StageArgs),
    /// Run all stages in order.
    Run(StageArgs),
}

impl StageArgs {
    fn resolve(&self) -> Result<PipelineConfig, CliError> {
        let mut cfg = PipelineConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        macro_rules! override_path {
            ($($field:ident),*) => {
                $(if let Some(value) = &self.$field {
                    cfg.$field = Some(value.clone());
                })*
            };
        }
        override_path!(
            output_dir,
            corpus_dir,
            metadata_file,
            candidates_file,
            include_file,
            exclude_file
        );
        if let Some(v) = self.min_length {
            cfg.min_length = v;
        }
        if let Some(v) = self.min_candidate_freq {
            cfg.min_candidate_freq = v;
        }
        if let Some(v) = self.min_total_mentions {
            cfg.min_total_mentions = v;
        }
        if let Some(mode) = &self.factor_mode {
            cfg.factor_mode = match mode.as_str() {
                "explicit" => FactorMode::Explicit,
                "kaiser" => FactorMode::Kaiser,
                other => {
                    return Err(CliError::Validation(format!(
                        "invalid --factor-mode '{other}' (expected 'explicit' or 'kaiser')"
                    )))
                }
            };
        }
        if let Some(v) = self.k {
            cfg.k = Some(v);
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.membership_threshold {
            cfg.membership_threshold = v;
        }
        if let Some(v) = self.display_threshold {
            cfg.display_threshold = v;
        }
        Ok(cfg)
    }
}

fn execute(command: &Command) -> Result<Warnings, CliError> {
    let mut warnings = Warnings::default();
    match command {
        Command::Lexicon(args) => {
            let cfg = args.resolve()?;
            cfg.validate(&[Stage::Lexicon])?;
            run_stage(&cfg, Stage::Lexicon, &mut warnings)?;
        }
        Command::Matrix(args) => {
            let cfg = args.resolve()?;
            cfg.validate(&[Stage::Matrix])?;
            run_stage(&cfg, Stage::Matrix, &mut warnings)?;
        }
        Command::Factor(args) => {
            let cfg = args.resolve()?;
            cfg.validate(&[Stage::Factor])?;
            run_stage(&cfg, Stage::Factor, &mut warnings)?;
        }
        Command::Export(args) => {
            let cfg = args.resolve()?;
            cfg.validate(&[Stage::Export])?;
            run_stage(&cfg, Stage::Export, &mut warnings)?;
        }
        Command::Run(args) => {
            let cfg = args.resolve()?;
            cfg.validate(&[Stage::Lexicon, Stage::Matrix, Stage::Factor, Stage::Export])?;
            run_all(&cfg, &mut warnings)?;
        }
    }
    Ok(warnings)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(warnings) if warnings.0.is_empty() => ExitCode::SUCCESS,
        Ok(warnings) => {
            for warning in &warnings.0 {
                eprintln!("warning: {warning}");
            }
            ExitCode::from(4)
        }
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}
