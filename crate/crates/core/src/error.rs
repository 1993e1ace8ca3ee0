//! Error type shared by all pipeline stages.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path} is not valid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { path: PathBuf, offset: usize },

    /// Malformed row or header in a delimiter-separated input or artifact file.
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("missing document file {file}")]
    MissingDocumentFile { file: String },

    #[error("duplicate doc_id '{doc_id}' in metadata")]
    DuplicateDocId { doc_id: String },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error(
        "curation entry '{entry}' in {path} is not a lemma (lemmatizes to '{expected}')"
    )]
    InvalidCurationEntry {
        path: PathBuf,
        entry: String,
        expected: String,
    },

    #[error("variant sets of lemmas '{lemma_a}' and '{lemma_b}' collide on '{variant}'")]
    VariantCollision {
        lemma_a: String,
        lemma_b: String,
        variant: String,
    },

    #[error("need at least 2 mention profiles to build a matrix, found {found}")]
    TooFewProfiles { found: usize },

    #[error("co-mention of '{lemma}' with itself is undefined (diagonal is missing by policy)")]
    SameLemma { lemma: String },

    #[error("column '{lemma}' has zero variance, cannot correlate")]
    ConstantColumn { lemma: String },

    #[error("eigen solver did not converge within {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("factor count {k} out of range 1..={n}")]
    FactorCountOutOfRange { k: usize, n: usize },

    #[error("eigenvalue {index} is {value:e}, cannot extract loading column")]
    NonpositiveEigenvalue { index: usize, value: f64 },

    #[error("rotation transform is singular")]
    SingularTransform,

    #[error("no displayable nodes")]
    EmptyGraph,
}
