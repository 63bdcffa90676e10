use thiserror::Error;

/// Errors raised by arithmetic, error-bound bookkeeping and evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("even root of a negative number")]
    NegativeEvenRoot,
    #[error("logarithm of zero is undefined")]
    LogOfZero,
    #[error("root index must be at least 2, got {0}")]
    InvalidRootIndex(u32),
    #[error("precision must be at least 2 bits, got {0}")]
    InvalidPrecision(u32),
    #[error("error bounds with different representations cannot be combined ({0} vs {1})")]
    MixedRepresentation(&'static str, &'static str),
    #[error("error bound exponent overflow")]
    ExponentOverflow,
    #[error("usage error: {0}")]
    Usage(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
