//! Aggregate statistics over a batch of evaluation episodes.

use crate::error::{EvalError, Result};

/// Mean and spread of undiscounted episode returns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalScore {
    pub mean: f64,
    /// Population standard deviation (zero for a single episode).
    pub std: f64,
    /// Number of episodes aggregated.
    pub n_rollouts: usize,
}

impl EvalScore {
    /// Aggregate a non-empty list of episode returns.
    pub fn from_returns(returns: &[f64]) -> Result<Self> {
        if returns.is_empty() {
            return Err(EvalError::Config(
                "cannot score an empty set of returns".into(),
            ));
        }
        if let Some(bad) = returns.iter().find(|r| !r.is_finite()) {
            return Err(EvalError::Config(format!(
                "non-finite episode return {bad}"
            )));
        }
        let n = returns.len() as f64;
        let mean = returns.iter().sum::<f64>() / n;
        let variance = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
        Ok(EvalScore {
            mean,
            std: variance.sqrt(),
            n_rollouts: returns.len(),
        })
    }
}
