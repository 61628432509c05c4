//! Hyperparameters for the clipped-surrogate update.

use serde::{Deserialize, Serialize};

use crate::error::{PpoError, Result};

/// All PPO hyperparameters. [`Default`] gives the desk-scale schedule used
/// throughout this workspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    /// Reward discount γ.
    pub gamma: f64,
    /// Advantage-estimation decay λ.
    pub lam: f64,
    /// Surrogate clip width ε: ratios are clipped to [1−ε, 1+ε].
    pub clip_eps: f64,
    /// Weight of the value-function regression term.
    pub value_coeff: f64,
    /// Weight of the entropy bonus.
    pub entropy_coeff: f64,
    /// Adam learning rate, shared by policy and value nets.
    pub lr: f64,
    /// Transitions per gradient step.
    pub minibatch_size: usize,
    /// Full passes over the batch per update.
    pub sgd_epochs: usize,
    /// Agent transitions collected per training iteration.
    pub train_batch_size: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            gamma: 0.995,
            lam: 0.95,
            clip_eps: 0.3,
            value_coeff: 1.0,
            entropy_coeff: 0.0,
            lr: 3e-4,
            minibatch_size: 256,
            sgd_epochs: 10,
            train_batch_size: 4000,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<()> {
        let check_unit = |name: &str, v: f64| -> Result<()> {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(PpoError::Config(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
            Ok(())
        };
        check_unit("gamma", self.gamma)?;
        check_unit("lam", self.lam)?;
        if !(self.clip_eps.is_finite() && self.clip_eps > 0.0) {
            return Err(PpoError::Config(format!(
                "clip_eps must be positive, got {}",
                self.clip_eps
            )));
        }
        for (name, v) in [
            ("value_coeff", self.value_coeff),
            ("entropy_coeff", self.entropy_coeff),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(PpoError::Config(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(PpoError::Config(format!("lr must be positive, got {}", self.lr)));
        }
        for (name, v) in [
            ("minibatch_size", self.minibatch_size),
            ("sgd_epochs", self.sgd_epochs),
            ("train_batch_size", self.train_batch_size),
        ] {
            if v == 0 {
                return Err(PpoError::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}
