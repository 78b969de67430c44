use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty eigenvalue sequence")]
    EmptySpectrum,
    #[error("eigenvalue {index} is {value}; eigenvalues must be finite and positive")]
    InvalidEigenvalue { index: usize, value: f64 },
    #[error("coefficient {index} is not finite")]
    NonFiniteCoefficient { index: usize },
    #[error("length mismatch: operator has {operator} modes, vector has {vector}")]
    LengthMismatch { operator: usize, vector: usize },
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("quadrature did not reach relative tolerance {tol:e} (estimated error {estimate:e})")]
    QuadratureNotConverged { tol: f64, estimate: f64 },
    #[error("step covariance factorization failed at jitter {jitter:e} (min pivot {min_pivot:e}, condition estimate {condition:e})")]
    Factorization {
        jitter: f64,
        min_pivot: f64,
        condition: f64,
    },
    #[error("zero vector has no equivalence ratio")]
    ZeroVector,
    #[error("resolution guard: {modes} modes need at least {required} grid intervals, got {intervals}")]
    Resolution {
        modes: usize,
        required: usize,
        intervals: usize,
    },
    #[error("invalid grid: {0}")]
    Grid(&'static str),
}

pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
