//! Error type for population training.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    /// Invalid training configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Environment failure during rollout collection.
    #[error(transparent)]
    Env(#[from] env_suite::EnvError),
    /// Optimization failure during an update.
    #[error(transparent)]
    Ppo(#[from] ppo_learner::PpoError),
    /// Network or checkpoint failure.
    #[error(transparent)]
    Nn(#[from] nn_core::NnError),
}

pub type Result<T> = std::result::Result<T, TrainError>;
