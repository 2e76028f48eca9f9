use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("endpoint {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {0} is isolated; normalized matrices need degree >= 1")]
    IsolatedVertex(usize),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid label {0}; labels must be 0 or 1")]
    InvalidLabel(u8),
    #[error("partition is not balanced ({zeros} zeros, {ones} ones)")]
    Unbalanced { zeros: usize, ones: usize },
    #[error("dimension {n} exceeds cap {cap}")]
    DimensionOverCap { n: usize, cap: usize },
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("pair ({0}, {1}) crosses the planted partition")]
    CrossingPair(usize, usize),
    #[error("vertex {vertex} has {count} planted pairs, over the budget {budget:.3}")]
    PlantBudgetExceeded { vertex: usize, count: usize, budget: f64 },
    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:e})")]
    NonConvergence { iterations: usize, best_residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("vector is not unit length (norm {0})")]
    NotUnit(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("schema violation: {0}")]
    Schema(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
