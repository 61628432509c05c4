use thiserror::Error;

/// Errors produced by environment construction and stepping.
#[derive(Debug, Error)]
pub enum EnvError {
    /// Invalid parameters, ranges, or environment ids.
    #[error("configuration error: {0}")]
    Config(String),

    /// The caller broke the stepping protocol (e.g. stepped a finished
    /// episode or skipped reset).
    #[error("protocol error: {0}")]
    Protocol(String),

    /// An action or state had the wrong dimensionality.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A NaN or infinity reached the dynamics.
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, EnvError>;
