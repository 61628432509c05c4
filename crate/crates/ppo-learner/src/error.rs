use thiserror::Error;

/// Errors from advantage estimation and policy updates.
#[derive(Debug, Error)]
pub enum PpoError {
    /// Hyperparameters out of range or structurally invalid input.
    #[error("configuration error: {0}")]
    Config(String),

    /// Mismatched lengths or dimensions.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// NaN/infinity reached the optimizer.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An underlying network operation failed.
    #[error(transparent)]
    Nn(#[from] nn_core::NnError),
}

pub type Result<T> = std::result::Result<T, PpoError>;
