use thiserror::Error;

use crate::lattice::Point;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("contradiction at {point} in coordinate {coord}")]
    Contradiction { point: Point, coord: usize },
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("implementation gap: {0}")]
    Gap(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("protocol error: {0}")]
    Protocol(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
