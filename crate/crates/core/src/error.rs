use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid weight model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("normalizer mode {mode} is not applicable: {reason}")]
    ModeMismatch { mode: String, reason: String },

    #[error("normalizer decreased from {from} to {to}; evolution requires a non-decreasing normalizer")]
    DecreasingNormalizer { from: f64, to: f64 },

    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("fixed-point iteration did not converge within {iterations} iterations (last iterate {last})")]
    NonConvergence { iterations: usize, last: f64 },

    #[error("infinite moment: {0}")]
    InfiniteMoment(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
