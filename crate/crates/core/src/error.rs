use core::fmt;

/// Errors raised by the learners, the controller and the metrics.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The unregularized normal equations are rank deficient; use a ridge `lambda > 0`.
    Singular,
    /// A recursive inverse update lost positive definiteness. The owner should
    /// rebuild its state from retained data.
    NumericalBreakdown,
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    InsufficientData {
        needed: usize,
        got: usize,
    },
    /// A target too close to zero for a percentage error.
    NearZeroTarget {
        index: usize,
        value: f64,
    },
    InvalidConfig(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Singular => write!(f, "singular least-squares system (regularize with lambda > 0)"),
            Error::NumericalBreakdown => write!(f, "inverse Gram update lost positive definiteness"),
            Error::DimensionMismatch { what, expected, found } => {
                write!(f, "dimension mismatch in {what}: expected {expected}, found {found}")
            }
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need at least {needed} samples, got {got}")
            }
            Error::NearZeroTarget { index, value } => {
                write!(f, "target {value} at position {index} is too close to zero for MAPE")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
