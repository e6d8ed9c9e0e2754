use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input")]
    NonFiniteInput,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("degenerate data: all values are equal")]
    DegenerateData,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid misaligned: {0}")]
    GridMisaligned(String),
    #[error("AR coefficients are not stationary (characteristic root modulus {min_root_modulus:.6} <= 1)")]
    NonStationaryCoefficients { min_root_modulus: f64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no valid learning-sample shifts in the observation window")]
    NoValidShifts,
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("objective variant requires a bootstrap row")]
    MissingBootstrap,
    #[error("descent diverged to a non-finite iterate at step {iteration}")]
    DivergedToNonFinite {
        iteration: usize,
        last_finite: Vec<f64>,
    },
    #[error("covariance matrix is not positive definite")]
    SingularCovariance,
    #[error("invalid config `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure_finite(x: f64) -> Result<f64> {
    if x.is_nan() {
        Err(Error::NonFiniteInput)
    } else {
        Ok(x)
    }
}
