use thiserror::Error;

/// Errors raised by the transform, factorization and inversion routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty input vector")]
    EmptyInput,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("level mismatch: expected level {expected}, found level {found}")]
    LevelMismatch { expected: usize, found: usize },
    #[error("invalid level {m} for n = {n}")]
    InvalidLevel { n: usize, m: usize },
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("image side {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("odd length {0} cannot be split into two halves")]
    OddLength(usize),
    #[error("non-finite value in input")]
    NonFinite,
}

pub type Result<T> = core::result::Result<T, Error>;
