//! Rollout storage: per-step records plus episode-level tags.

use crate::error::{PpoError, Result};

/// One environment transition as the learner sees it. `action` is the raw
/// policy sample (before any clipping), and `logp_old` its density under the
/// behavior policy, so importance ratios are well-defined.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub logp_old: f64,
    pub value_old: f64,
    pub reward: f64,
    pub done: bool,
}

/// One collected episode (possibly truncated), tagged with the adversary
/// that was active while it was collected (`None` for unperturbed rollouts).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<StepRecord>,
    /// 1-based population index of the active adversary.
    pub adversary_index: Option<usize>,
    /// Value estimate of the state after the final step; 0 for terminal
    /// episodes, V(s_T) when the episode was cut off mid-flight.
    pub bootstrap_value: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Undiscounted sum of rewards.
    pub fn episode_return(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(PpoError::Shape("trajectory has no steps".into()));
        }
        for (t, step) in self.steps.iter().enumerate() {
            if !step.logp_old.is_finite() {
                return Err(PpoError::Numeric(format!("logp_old at step {t}")));
            }
            if !(step.reward.is_finite() && step.value_old.is_finite()) {
                return Err(PpoError::Numeric(format!("reward/value at step {t}")));
            }
            if step.done && t + 1 != self.steps.len() {
                return Err(PpoError::Shape(format!(
                    "done flag set at interior step {t} of {}",
                    self.steps.len()
                )));
            }
        }
        if !self.bootstrap_value.is_finite() {
            return Err(PpoError::Numeric("bootstrap value".into()));
        }
        Ok(())
    }
}
