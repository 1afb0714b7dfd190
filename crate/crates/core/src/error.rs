use thiserror::Error;

/// Errors raised by index construction, transforms, solvers and data handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid superposition threshold {ds} for dimension {d}")]
    InvalidThreshold { d: usize, ds: usize },

    #[error("invalid term {term:?}: {reason}")]
    InvalidTerm { term: Vec<usize>, reason: String },

    #[error("invalid bandwidth {bandwidth} for term {term}: {reason}")]
    InvalidBandwidth {
        term: String,
        bandwidth: usize,
        reason: &'static str,
    },

    #[error("frequency support does not match term {term}")]
    SupportMismatch { term: String },

    #[error("unknown term {0}")]
    UnknownTerm(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coefficients do not belong to the index set of this plan")]
    IndexSetMismatch,

    #[error("node coordinate {value} outside the basis domain")]
    NodeOutOfDomain { value: f64 },

    #[error("empty node set")]
    EmptyNodes,

    #[error("oversampled grid of size {0} per axis overflows")]
    GridOverflow(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("root bracket failure: threshold {threshold} not below {limit}")]
    BracketFailure { threshold: f64, limit: f64 },

    #[error("global variance is zero")]
    ZeroVariance,

    #[error("inconsistent oracle: squared error {0} is negative")]
    InconsistentOracle(f64),

    #[error("unknown column {0}")]
    UnknownColumn(String),

    #[error("dataset is empty after preprocessing")]
    EmptyDataset,

    #[error("invalid label {0:?}")]
    InvalidLabel(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
