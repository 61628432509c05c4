//! Error type for the evaluation harness.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    /// Invalid evaluation request (bad ranges, empty seed lists, ...).
    #[error("config error: {0}")]
    Config(String),
    /// Policy and environment disagree about dimensions.
    #[error("shape error: {0}")]
    Shape(String),
    #[error(transparent)]
    Env(#[from] env_suite::EnvError),
    #[error(transparent)]
    Nn(#[from] nn_core::NnError),
    #[error(transparent)]
    Train(#[from] rap_trainer::TrainError),
}

pub type Result<T> = std::result::Result<T, EvalError>;
