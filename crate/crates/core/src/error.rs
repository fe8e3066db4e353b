use thiserror::Error;

/// Errors raised by graph construction, solvers and checkers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vertex {vertex} lies on the truncation boundary: {context}")]
    BoundarySupport { vertex: usize, context: String },

    #[error("function is not strictly positive at vertex {vertex} (value {value})")]
    NotPositive { vertex: usize, value: f64 },

    #[error("operator is not positive: smallest Dirichlet eigenvalue estimate {eigenvalue:e}")]
    NotPositiveOperator { eigenvalue: f64 },

    #[error("vertex count {count} exceeds the configured limit {limit}")]
    TooLarge { count: usize, limit: usize },

    #[error("singular or indefinite system: {0}")]
    Singular(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("bisection bracket failure: {0}")]
    Bracket(String),

    #[error("quadrature failed for offset {offset:?}: estimated error {estimate:e}")]
    Quadrature { offset: Vec<i64>, estimate: f64 },

    #[error("insufficient data for fit: {0}")]
    InsufficientData(String),

    #[error("missing reference object: {0}")]
    MissingReference(String),

    #[error("inconsistent results: {0}")]
    Inconsistent(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
