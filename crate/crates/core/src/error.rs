use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degenerate input at index {index}: {msg}")]
    Degenerate { index: usize, msg: String },
    #[error("null state: {0}")]
    NullState(String),
    #[error("not hermitian: residual {0:e}")]
    NotHermitian(f64),
    #[error("iteration limit reached; best residual {0:e}")]
    NoConvergence(f64),
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("isometry check failed: residual {0:e}")]
    Isometry(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
