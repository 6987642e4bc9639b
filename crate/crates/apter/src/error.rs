use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by dataset ingestion, model fitting and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed header: {0}")]
    Header(String),

    #[error("data row {row}, column {column}: {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("covariate length {found} does not match dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("score vector length {found} does not match subject count {expected}")]
    ScoreLength { expected: usize, found: usize },

    #[error("response length {found} does not match subject count {expected}")]
    ResponseLength { expected: usize, found: usize },

    #[error("no comparable pairs")]
    NoComparablePairs,

    #[error("empty feature subset")]
    EmptyFeatureSubset,

    #[error("feature index {index} out of range for dimension {dim}")]
    FeatureOutOfRange { index: usize, dim: usize },

    #[error("nu must be positive and finite, got {0}")]
    InvalidNu(f64),

    #[error("at least 2 experts are needed for the theoretical rate, got {0}")]
    TooFewExperts(usize),

    #[error("screening count {count} outside valid range 1..={max}")]
    InvalidScreenCount { count: usize, max: usize },

    #[error(
        "screening sizes must satisfy per_step <= target <= dimension, \
         got per_step={per_step}, target={target}, dim={dim}"
    )]
    InvalidScreenSizes {
        per_step: usize,
        target: usize,
        dim: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("every round had an empty past-event set")]
    AllRoundsOmitted,

    #[error("every cross-validation fold was skipped (no comparable pairs)")]
    AllFoldsSkipped,

    #[error("model serialization: {0}")]
    ModelJson(#[from] serde_json::Error),

    #[error("unsupported model schema version {0}, expected 1")]
    UnsupportedSchema(u64),
}
