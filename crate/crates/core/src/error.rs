use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("invalid index {index} (have {len})")]
    InvalidIndex { index: usize, len: usize },
    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),
    #[error("not basepoint-free: {0}")]
    NotBasepointFree(String),
    #[error("section not regular on model: {0}")]
    NotRegular(String),
    #[error("incompatible inputs: {0}")]
    Incompatible(String),
    #[error("unsupported representation: {0}")]
    Unsupported(String),
    #[error("grid resolution too coarse: mass {mass} vs expected {expected}; try n_radial >= {suggested}")]
    Resolution { mass: f64, expected: f64, suggested: usize },
    #[error("rejected input: {0}")]
    Rejected(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
