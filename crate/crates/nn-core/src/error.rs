use thiserror::Error;

/// Errors produced by the neural substrate.
#[derive(Debug, Error)]
pub enum NnError {
    /// A structural request was malformed (zero-sized layer, mismatched chain, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Two shapes that had to agree did not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A NaN or infinity appeared where a finite number was required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Reading or writing a checkpoint file failed at the OS level.
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),

    /// A checkpoint file was readable but not understandable.
    #[error("checkpoint format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, NnError>;
