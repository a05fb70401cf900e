use thiserror::Error;

/// Errors produced by the optimizer and its supporting modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("negative radius {0} passed to kernel")]
    NegativeRadius(f64),
    #[error("interpolation nodes {0} and {1} coincide")]
    DuplicateNode(usize, usize),
    #[error("non-finite function value at node {0}")]
    NonFiniteValue(usize),
    #[error("interpolation system cannot be solved")]
    UnsolvableSystem,
    #[error("empty reference set")]
    EmptyReferenceSet,
    #[error("could not find a point distinct from the existing nodes")]
    NoDistinctPoint,
    #[error("initial design: {0}")]
    Design(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("optimization aborted after {restarts} restarts")]
    Aborted { restarts: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
