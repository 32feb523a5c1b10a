use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Parse,
    Dimension,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {what} = {value}")]
    InvalidDimension { what: &'static str, value: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("channel {channel} has zero sample variance")]
    DegenerateChannel { channel: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("dense size {size}x{size} exceeds cap {cap}x{cap}; use the matrix-free path")]
    SizeCap { size: usize, cap: usize },

    #[error("binomial coefficient overflow at power {k}")]
    BinomialOverflow { k: usize },

    #[error("scale {tau} undefined: coarse-grained length {length} is too short")]
    ScaleUndefined { tau: usize, length: usize },

    #[error("no dispersion patterns survived masking")]
    EmptyPatterns,

    #[error("classical mvDE would emit {count} dispersion patterns, above the cap of {cap}")]
    Capacity { count: BigUint, cap: u64 },

    #[error("correlation matrix is not positive semidefinite (leading minor of order {minor})")]
    NotPositiveSemidefinite { minor: usize },

    #[error("baseline voltage is zero at electrode {electrode}, measurement {measurement}")]
    InvalidBaseline {
        electrode: usize,
        measurement: usize,
    },

    #[error("parse error at line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: u64,
        column: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. } | Error::Json(_) => ErrorClass::Parse,
            Error::DimensionMismatch { .. } => ErrorClass::Dimension,
            Error::DegenerateChannel { .. }
            | Error::NotPositiveSemidefinite { .. }
            | Error::EmptyPatterns
            | Error::Capacity { .. }
            | Error::ScaleUndefined { .. }
            | Error::BinomialOverflow { .. }
            | Error::InvalidBaseline { .. }
            | Error::SizeCap { .. } => ErrorClass::Numeric,
            Error::InvalidDimension { .. }
            | Error::InvalidParameter(_)
            | Error::InvalidInput(_)
            | Error::Io(_) => ErrorClass::Usage,
        }
    }
}
