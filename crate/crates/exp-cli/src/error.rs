//! Error type and exit-code mapping for the experiment CLI.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or request; the user can fix the input.
    #[error("config error: {0}")]
    Config(String),
    #[error("config parse error: {0}")]
    TomlParse(#[from] toml::de::Error),
    #[error("config serialize error: {0}")]
    TomlWrite(#[from] toml::ser::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest error: {0}")]
    Json(#[from] serde_json::Error),
    /// A persisted run directory fails verification.
    #[error("verification failed: {0}")]
    Verify(String),
    #[error(transparent)]
    Train(#[from] rap_trainer::TrainError),
    #[error(transparent)]
    Eval(#[from] eval_harness::EvalError),
    #[error(transparent)]
    Nn(#[from] nn_core::NnError),
    #[error(transparent)]
    Env(#[from] env_suite::EnvError),
}

impl CliError {
    /// Process exit code: 1 for configuration mistakes the user can fix in
    /// the input, 2 for runtime failures.
    pub fn exit_code(&self) -> u8 {
        use rap_trainer::TrainError;
        match self {
            CliError::Config(_) | CliError::TomlParse(_) => 1,
            CliError::Train(TrainError::Config(_)) => 1,
            CliError::Train(TrainError::Ppo(ppo_learner::PpoError::Config(_))) => 1,
            CliError::Train(TrainError::Env(env_suite::EnvError::Config(_))) => 1,
            CliError::Eval(eval_harness::EvalError::Config(_)) => 1,
            CliError::Env(env_suite::EnvError::Config(_)) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
