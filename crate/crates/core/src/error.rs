use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("node {node} has zero population degree")]
    DegenerateNode { node: usize },

    #[error("index {index} out of range: {reason}")]
    Range { index: usize, reason: String },

    #[error("infeasible clustering: {nonzero_rows} nonzero rows for {k} clusters")]
    Infeasible { nonzero_rows: usize, k: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {message}")]
    Ingest { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dims(context: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn ingest(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Ingest {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
