use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("no convergence after {iterations} iterations (best value {best})")]
    NoConvergence { iterations: usize, best: f64 },

    #[error("empty intersection between neighbour set of x={x} and block {block}")]
    EmptyIntersection { x: usize, block: usize },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("no certified partition after {restarts} restarts (best max_tv {best_tv})")]
    PartitionSearch { restarts: usize, best_tv: f64 },

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
