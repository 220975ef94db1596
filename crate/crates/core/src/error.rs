use std::io;

use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    /// The file does not follow the expected layout (bad magic, version, dimension).
    #[error("format error: {0}")]
    Format(String),

    /// The file ended early or carries trailing bytes.
    #[error("corrupt file at byte offset {offset}: {reason}")]
    Corruption { offset: u64, reason: String },

    /// Subword rows were not grouped contiguously by (doc_id, word_index).
    #[error("ordering error: {0}")]
    Ordering(String),

    #[error("filter policy error: {0}")]
    Policy(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// Invalid numeric input, e.g. a zero vector handed to cosine clustering.
    #[error("input error: {0}")]
    Input(String),

    /// Internal consistency check failed (ids out of range, counts that do not reconcile).
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("metadata error: {0}")]
    Metadata(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Short machine-readable category name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::Format(_) => "format",
            Error::Corruption { .. } => "corruption",
            Error::Ordering(_) => "ordering",
            Error::Policy(_) => "policy",
            Error::InsufficientData(_) => "insufficient-data",
            Error::DimensionMismatch { .. } => "dimension",
            Error::Input(_) => "input",
            Error::Integrity(_) => "integrity",
            Error::Metadata(_) => "metadata",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
