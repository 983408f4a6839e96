use std::io;

use thiserror::Error;

/// Errors raised by the token-selection library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable, machine-parseable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::DegenerateInput(_) => "degenerate-input",
            Error::InvalidBudget(_) => "invalid-budget",
            Error::InstanceTooLarge(_) => "instance-too-large",
            Error::Format(e) => e.category(),
            Error::Numerical(_) => "numerical",
            Error::Serde(_) => "serialization",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn budget(msg: impl Into<String>) -> Self {
        Error::InvalidBudget(msg.into())
    }
}

/// Malformed on-disk token or saliency files.
#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("{extra} trailing bytes after payload")]
    TrailingBytes { extra: u64 },

    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("negative value {value} at flat index {index}")]
    Negative { index: usize, value: f32 },

    #[error("zero dimension in header ({rows}x{cols})")]
    EmptyShape { rows: u32, cols: u32 },
}

impl FormatError {
    pub fn category(&self) -> &'static str {
        match self {
            FormatError::BadMagic { .. } => "format-bad-magic",
            FormatError::Truncated { .. } => "format-truncated",
            FormatError::TrailingBytes { .. } => "format-trailing-bytes",
            FormatError::NonFinite { .. } => "format-non-finite",
            FormatError::Negative { .. } => "format-negative",
            FormatError::EmptyShape { .. } => "format-empty-shape",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
