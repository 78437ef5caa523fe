use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid height sequence: {0}")]
    InvalidHeight(String),
    #[error("invalid Dyck path: {0}")]
    InvalidDyck(String),
    #[error("invalid label sequence: {0}")]
    InvalidLabels(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("index {index} out of range 0..={max}")]
    OutOfRange { index: usize, max: usize },
    #[error("corner {0} is not a corner of the root vertex")]
    NotRootCorner(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("size must be at least 1")]
    ZeroSize,
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("partition is crossing: {0}")]
    Crossing(String),
    #[error("inconsistent snake: {0}")]
    InconsistentSnake(String),
    #[error("graph is disconnected: {} unreachable vertices", unreachable.len())]
    Disconnected { unreachable: Vec<usize> },
    #[error("guard exceeded: {what} = {value} > {limit}")]
    Guard {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("parse error: {0}")]
    Parse(String),
}
