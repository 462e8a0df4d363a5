use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}: file contains no entries")]
    Empty(PathBuf),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("words not in vocabulary: {}", .0.join(", "))]
    OutOfVocabulary(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed model document: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by caller-supplied settings rather than data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidArgument(_))
    }
}
