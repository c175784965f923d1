use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error("non-finite integrand value {value} at node {node}")]
    NonFinite { node: Complex64, value: Complex64 },

    #[error("index {index} out of range 1..={m}")]
    IndexOutOfRange { index: usize, m: usize },

    #[error("alpha must be strictly increasing")]
    NonIncreasingAlpha,

    #[error("invalid point configuration: {0}")]
    InvalidConfig(String),

    #[error("contour ordering violated: {0}")]
    ContourOrdering(String),

    #[error("matrix is numerically singular (pivot {pivot:e} in column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("refinement did not converge: estimate {estimate:e} exceeds tolerance {tol:e}")]
    NotConverged { estimate: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("coincident entries in Cauchy determinant at ({row}, {col})")]
    CoincidentEntries { row: usize, col: usize },

    #[error("cost guard exceeded: {0}")]
    CostGuard(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of the numerics as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::Singular { .. } | Error::NotConverged { .. }
        )
    }
}
