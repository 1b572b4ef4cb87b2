use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("invalid spatial grid: {0}")]
    InvalidSpatialGrid(String),
    #[error("a_min = {a_min} is below the resolution limit 2h = {limit}")]
    Resolution { a_min: f64, limit: f64 },
    #[error("invalid frame grid: {0}")]
    InvalidFrameGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),
    #[error("T1 truncation error {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    Truncation { estimate: f64, tolerance: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
