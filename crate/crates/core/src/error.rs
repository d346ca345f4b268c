use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric")]
    Symmetry,
    #[error("field error: {0}")]
    Field(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("capability error: {0}")]
    Capability(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("unknown name {0:?}")]
    Lookup(String),
    #[error("carousel size must be odd, got {0}")]
    Parity(usize),
    #[error("vertex {vertex} out of range for a tournament on {n} vertices")]
    Index { vertex: usize, n: usize },
    #[error("invalid certificate: {0}")]
    Certificate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
