use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not Hermitian: max |m - m†| entry is {deviation:e} (tolerance 1e-10)")]
    NotHermitian { deviation: f64 },

    #[error(
        "invalid density matrix: hermiticity deviation {hermiticity:e}, \
         trace deviation {trace:e}, minimum eigenvalue {min_eigenvalue:e}"
    )]
    InvalidState {
        hermiticity: f64,
        trace: f64,
        min_eigenvalue: f64,
    },

    #[error("state vector is not normalized: norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("time {t} lies beyond the rate table (last sample at {end})")]
    OutsideTable { t: f64, end: f64 },

    #[error("invalid rate function: {0}")]
    InvalidRate(String),

    #[error("invalid channel parameter: {0}")]
    InvalidParameter(String),

    #[error("integration step too large: trace drift {drift:e} exceeds 1e-8")]
    StepTooLarge { drift: f64 },

    #[error("{quantity} = {value} is outside its admissible range [{lower}, {upper}]")]
    Inconsistent {
        quantity: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("evolved state leaves the set of density matrices at t = {t} (minimum eigenvalue {min_eigenvalue:e})")]
    Unphysical { t: f64, min_eigenvalue: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
