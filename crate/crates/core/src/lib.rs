#![forbid(unsafe_code)]
//! Author co-mention analysis toolkit.
//!
//! Builds a curated surname lexicon from a candidate frequency list, scans
//! a plain-text corpus for lemmatized surname mentions, accumulates the
//! weighted author × author co-mention matrix, runs an exploratory factor
//! analysis with direct Oblimin rotation, and exports Pajek graph files
//! plus factor reports for inspection.
//!
//! The pipeline stages map onto the modules in order: [`corpus`] →
//! [`lexicon`] → [`mentions`] → [`comention`] → [`factors`] → [`export`].

pub mod comention;
pub mod corpus;
pub mod error;
pub mod export;
pub mod factors;
pub mod lexicon;
pub mod linalg;
pub mod mentions;
pub mod testing;

mod ioutil;

pub use comention::{build_matrix, comention_count, ComentionMatrix};
pub use corpus::{load_corpus, tokenize, Corpus, Document};
pub use error::{Error, Result};
pub use export::{build_graph, write_pajek, write_summary, GraphSpec};
pub use factors::{
    correlation_matrix, eigen_spectrum, extract_loadings, factor_report, fill_diagonal_mean,
    oblimin_rotate, select_k, DataMatrix, EigenSpectrum, FactorCountMode, FactorReport,
    FactorSolution, ObliminOptions,
};
pub use lexicon::{
    build_lexicon, count_corpus_frequency, expand_variants, load_candidates, CandidateSurname,
    Lexicon, Thresholds,
};
pub use mentions::{
    build_profiles, filter_min_mentions, scan_document, MentionProfile, ProfileSet,
};
