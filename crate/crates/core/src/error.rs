use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("edge {index}: weight {weight} must be positive and finite")]
    BadWeight { index: usize, weight: f64 },

    #[error("node {index}: capacity {capacity} must be positive and finite")]
    BadCapacity { index: usize, capacity: f64 },

    #[error("duplicate edge {index} between nodes {head} and {tail}")]
    DuplicateEdge { index: usize, head: usize, tail: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("boundary specification: {0}")]
    Boundary(String),

    #[error("conjugate gradient did not converge at step {step}: residual {residual:e} after {iterations} iterations")]
    NotConverged {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("matrix is not positive semidefinite: inner product {0:e}")]
    NotPsd(f64),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("eigensolver failed on patch {patch}: {reason}")]
    Eigen { patch: usize, reason: String },

    #[error("zero reference norm")]
    ZeroReference,

    #[error("generator: {0}")]
    Generator(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("format: {0}")]
    Format(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
