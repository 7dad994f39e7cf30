use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite: pivot {pivot} is {value}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is not symmetric: |x[{row}][{col}] - x[{col}][{row}]| exceeds tolerance")]
    NotSymmetric { row: usize, col: usize },

    #[error("triangular matrix is singular at diagonal index {index}")]
    SingularMatrix { index: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid degrees of freedom {value}: {reason}")]
    InvalidDegreesOfFreedom { value: f64, reason: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix has nonzero entry ({row}, {col}) below the diagonal")]
    NotUpperTriangular { row: usize, col: usize },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("inverse-Wishart mean is undefined for n = {n} <= m + 1 = {}", .m + 1)]
    MeanUndefined { n: f64, m: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl Error {
    /// True for failures caused by the numerical content of a matrix rather
    /// than by malformed arguments.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::NotSymmetric { .. }
                | Error::SingularMatrix { .. }
                | Error::NonFinite { .. }
                | Error::NumericalFailure(_)
        )
    }
}
