use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported format version {0}")]
    BadVersion(u32),
    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("size exponent {0} out of range")]
    BadSize(u32),
    #[error("unknown {what} {name:?}")]
    Unknown { what: &'static str, name: String },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] adrt::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Whether the error comes from a bad argument value rather than from
    /// running the command.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            HarnessError::Unknown { .. } | HarnessError::Invalid(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
