use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid characteristic: {0}")]
    InvalidCharacteristic(String),
    #[error("invalid tolerance {0:e}: must lie in [1e-13, inf)")]
    InvalidTolerance(f64),
    #[error("invalid period matrix: {0}")]
    InvalidPeriodMatrix(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("path construction failed: {0}")]
    PathConstruction(String),
    #[error("divisor has degree {found}, expected {expected}")]
    WrongDegree { expected: i64, found: i64 },
    #[error("points are not in generic position: {0}")]
    GenericPosition(String),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Smallest tolerance accepted by evaluation routines.
pub const MIN_TOLERANCE: f64 = 1e-13;

pub(crate) fn check_tolerance(eps: f64) -> Result<()> {
    if eps.is_finite() && eps >= MIN_TOLERANCE {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(eps))
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
