use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("eigensolver did not converge within {sweeps} iterations")]
    NoConvergence { sweeps: usize },

    #[error("correlation {0} is outside (-1, 1)")]
    CorrelationOutOfRange(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0}")]
    DimensionTooSmall(String),

    #[error("invalid population: {0}")]
    InvalidPopulation(String),

    #[error("class {0} has no observations")]
    EmptyClass(usize),

    #[error("degenerate design: K = {k} must be smaller than n = {n}")]
    DegenerateDesign { k: usize, n: usize },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),

    #[error("LPD direction for class {0} is infeasible")]
    LpInfeasible(usize),

    #[error("class {class} has {count} observations, fewer than {folds} folds")]
    ClassTooSmall { class: usize, count: usize, folds: usize },

    #[error("every tuning combination failed")]
    AllCombosInvalid,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
