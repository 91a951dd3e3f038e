use thiserror::Error;

/// Errors raised by the numerical kernels and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("size cap exceeded: {what} is {got}, limit {limit}")]
    SizeCap {
        what: &'static str,
        got: u128,
        limit: u128,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("key mismatch: {0}")]
    Key(String),
    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn size_cap(what: &'static str, got: impl Into<u128>, limit: impl Into<u128>) -> Error {
    Error::SizeCap {
        what,
        got: got.into(),
        limit: limit.into(),
    }
}
