use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the landscape pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no records in {0}")]
    NoRecords(PathBuf),

    #[error("duplicate document id {id:?} (records {first} and {second})")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },

    #[error("record at line {line} is missing required field {field:?}")]
    MissingField { line: usize, field: &'static str },

    #[error("invalid query: {0}")]
    Query(String),

    #[error("aspect signal empty: {0}")]
    AspectEmpty(String),

    #[error("aspect disjoint from model vocabulary")]
    AspectDisjoint,

    #[error("all weights are zero")]
    ZeroWeights,

    #[error("vector sums to zero; cannot normalize")]
    ZeroSum,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("partition {partition} has {documents} documents but {allocated} subtopics were allocated; lower the total subtopic count")]
    PartitionTooSmall {
        partition: usize,
        documents: usize,
        allocated: usize,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("empty validation corpus")]
    EmptyValidation,

    #[error("hash mismatch for {path}: manifest {expected}, file {actual}")]
    HashMismatch {
        path: PathBuf,
        expected: String,
        actual: String,
    },

    #[error("corrupt session data in {path}: {message}")]
    Corrupt { path: PathBuf, message: String },

    #[error("not found: {0}")]
    NotFound(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input data rather than misuse of the API.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            Error::InvalidParameter(_) | Error::InvalidState(_) | Error::Query(_)
        )
    }
}
