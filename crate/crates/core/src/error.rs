use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("operation requires a multilinear polynomial")]
    NotMultilinear,

    #[error("operation requires a nonzero polynomial")]
    ZeroPolynomial,

    #[error("n = {n} exceeds the exact-computation limit {limit}")]
    SizeLimit { n: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("spectrum violates Parseval: sum of squares = {0}")]
    NotBoolean(f64),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("polynomial is not {epsilon}-regular")]
    NotRegular { epsilon: f64 },

    #[error("function {index} depends on its own coordinate")]
    DependsOnOwnCoordinate { index: usize },

    #[error("determining mode needs critical index {k} >= block size {l}")]
    CriticalIndexTooSmall { k: usize, l: usize },

    #[error("empty grid")]
    EmptyGrid,
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
