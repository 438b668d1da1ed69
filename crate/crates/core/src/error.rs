use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: feature index {index} exceeds expected dimension {expected}")]
    FeatureDimension {
        line: usize,
        index: usize,
        expected: usize,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset needs at least 2 classes, found {0}")]
    TooFewClasses(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "boosting failed on chunk {chunk_id}: no weak learner beat the random-guess threshold"
    )]
    BoostingFailure { chunk_id: usize },

    #[error("pipeline produced no usable chunk ensembles ({0})")]
    NoChunks(String),

    #[error("group {0} has fewer than 2 values")]
    InsufficientGroup(String),

    #[error("unsupported format version {0}")]
    FormatVersion(u32),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether this error stems from input data rather than from training.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::FeatureDimension { .. }
                | Error::EmptyDataset
                | Error::TooFewClasses(_)
                | Error::DimensionMismatch { .. }
                | Error::NonFinite(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::FormatVersion(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
