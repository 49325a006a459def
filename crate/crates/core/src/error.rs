use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("divisibility violated: {0}")]
    Divisibility(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("singular matrix")]
    Singular,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn divisibility(msg: impl Into<String>) -> Error {
    Error::Divisibility(msg.into())
}

pub(crate) fn range(msg: impl Into<String>) -> Error {
    Error::Range(msg.into())
}
