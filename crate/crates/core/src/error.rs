use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Result type used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by loading, featurizing, training, and reporting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: row {row}: {message}")]
    Record {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("duplicate id {id:?} at rows {first_row} and {second_row}")]
    DuplicateId {
        id: String,
        first_row: usize,
        second_row: usize,
    },

    #[error("label {label:?} has only {count} document(s) (row {row}); one-shot splitting needs at least 2")]
    SingletonLabel {
        label: String,
        count: usize,
        row: usize,
    },

    #[error("embedding file {path}: line {line}: {message}")]
    Embedding {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("document vector {id:?}: {message}")]
    DocVector { id: String, message: String },

    #[error("invalid n-gram range {n_min}..={n_max} (need 1 <= n_min <= n_max <= 8)")]
    NgramRange { n_min: usize, n_max: usize },

    #[error("dimension mismatch: expected {expected} columns, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid hyperparameter: {0}")]
    Hyperparameter(String),

    #[error("invalid training data: {0}")]
    TrainingData(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("length mismatch: {0} true labels vs {1} predictions")]
    LengthMismatch(usize, usize),

    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Invalid(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error came from the filesystem rather than from content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
