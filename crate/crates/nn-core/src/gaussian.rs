//! Diagonal Gaussian distributions and the policy / value-function wrappers.
//!
//! Policies are MLPs whose output is the per-dimension mean of a diagonal
//! Gaussian; the log standard deviations are free parameters independent of
//! the observation. `log_std` values are clamped to `[-5, 2]` at every use
//! site (sampling, density, entropy) so saved parameters stay raw while the
//! effective distribution stays numerically sane.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{NnError, Result};
use crate::mlp::mlp_forward;
use crate::params::{xavier_init, ParameterSet};

/// Lower clamp for `log_std` before exponentiation.
pub const LOG_STD_MIN: f64 = -5.0;
/// Upper clamp for `log_std` before exponentiation.
pub const LOG_STD_MAX: f64 = 2.0;

/// Hidden widths shared by every network in the workspace.
pub const DEFAULT_HIDDEN: [usize; 2] = [64, 64];

fn ln_2pi() -> f64 {
    (2.0 * std::f64::consts::PI).ln()
}

fn check_dims(mean: &[f64], log_std: &[f64]) -> Result<()> {
    if mean.len() != log_std.len() {
        return Err(NnError::Shape(format!(
            "mean has {} dims, log_std has {}",
            mean.len(),
            log_std.len()
        )));
    }
    if mean.is_empty() {
        return Err(NnError::Shape("zero-dimensional Gaussian".into()));
    }
    if !mean.iter().all(|v| v.is_finite()) {
        return Err(NnError::NonFinite("Gaussian mean".into()));
    }
    if !log_std.iter().all(|v| v.is_finite()) {
        return Err(NnError::NonFinite("Gaussian log_std".into()));
    }
    Ok(())
}

/// Log density of `action` under the diagonal Gaussian `N(mean, exp(log_std)^2)`.
///
/// Summed over dimensions: `-0.5 ((a - mean)/sigma)^2 - log_std - 0.5 ln(2 pi)`,
/// with `log_std` clamped to `[-5, 2]` before use.
pub fn gaussian_logp(mean: &[f64], log_std: &[f64], action: &[f64]) -> Result<f64> {
    check_dims(mean, log_std)?;
    if action.len() != mean.len() {
        return Err(NnError::Shape(format!(
            "action has {} dims, mean has {}",
            action.len(),
            mean.len()
        )));
    }
    if !action.iter().all(|v| v.is_finite()) {
        return Err(NnError::NonFinite("Gaussian action".into()));
    }
    let half_ln_2pi = 0.5 * ln_2pi();
    let mut logp = 0.0;
    for ((&m, &ls), &a) in mean.iter().zip(log_std.iter()).zip(action.iter()) {
        let ls = ls.clamp(LOG_STD_MIN, LOG_STD_MAX);
        // (a−m)·exp(−ls) rather than (a−m)/exp(ls): this is the exact
        // arithmetic the training-loss graph performs, so densities stored
        // at rollout time and densities recomputed in the loss agree bit for
        // bit when the parameters haven't moved.
        let z = (a - m) * (-ls).exp();
        logp += -0.5 * (z * z) - ls - half_ln_2pi;
    }
    Ok(logp)
}

/// Draw one action and return it with its log density.
///
/// The log density is computed by evaluating [`gaussian_logp`] on the action
/// actually produced, so `sample` and `logp` can never drift apart.
pub fn gaussian_sample(
    mean: &[f64],
    log_std: &[f64],
    rng: &mut impl Rng,
) -> Result<(Vec<f64>, f64)> {
    check_dims(mean, log_std)?;
    let action: Vec<f64> = mean
        .iter()
        .zip(log_std.iter())
        .map(|(&m, &ls)| {
            let sigma = ls.clamp(LOG_STD_MIN, LOG_STD_MAX).exp();
            let z: f64 = rng.sample(StandardNormal);
            m + sigma * z
        })
        .collect();
    let logp = gaussian_logp(mean, log_std, &action)?;
    Ok((action, logp))
}

/// Differential entropy of the diagonal Gaussian, summed over dimensions:
/// `log_std + 0.5 ln(2 pi e)` per dimension, `log_std` clamped as usual.
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    let half_ln_2pi_e = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    log_std
        .iter()
        .map(|&ls| ls.clamp(LOG_STD_MIN, LOG_STD_MAX) + half_ln_2pi_e)
        .sum()
}

/// A stochastic policy: tanh MLP mean plus free `log_std` parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    pub params: ParameterSet,
}

impl GaussianPolicy {
    /// Xavier-initialized policy with the given hidden widths and a zero
    /// `log_std` head.
    pub fn xavier(
        obs_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let shapes = chain_shapes(obs_dim, action_dim, hidden);
        let params = xavier_init(&shapes, rng)?.with_zero_log_std();
        Ok(GaussianPolicy { params })
    }

    pub fn from_params(params: ParameterSet) -> Result<Self> {
        params.validate()?;
        if params.log_std.is_none() {
            return Err(NnError::Config("policy parameters lack a log_std head".into()));
        }
        Ok(GaussianPolicy { params })
    }

    pub fn obs_dim(&self) -> usize {
        self.params.in_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.params.out_dim()
    }

    fn log_std(&self) -> &[f64] {
        self.params
            .log_std
            .as_deref()
            .expect("policy always carries log_std")
    }

    /// Mean action for an observation (the MLP forward pass).
    pub fn mean(&self, obs: &[f64]) -> Result<Vec<f64>> {
        mlp_forward(&self.params, obs)
    }

    /// Sample an action and its log density.
    pub fn sample(&self, obs: &[f64], rng: &mut impl Rng) -> Result<(Vec<f64>, f64)> {
        let mean = self.mean(obs)?;
        gaussian_sample(&mean, self.log_std(), rng)
    }

    /// Log density of a specific action at an observation.
    pub fn logp(&self, obs: &[f64], action: &[f64]) -> Result<f64> {
        let mean = self.mean(obs)?;
        gaussian_logp(&mean, self.log_std(), action)
    }

    /// Policy entropy (observation-independent for a state-independent
    /// `log_std`).
    pub fn entropy(&self) -> f64 {
        gaussian_entropy(self.log_std())
    }
}

/// A state-value estimator: tanh MLP with a single linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFn {
    pub params: ParameterSet,
}

impl ValueFn {
    pub fn xavier(obs_dim: usize, hidden: &[usize], rng: &mut impl Rng) -> Result<Self> {
        let shapes = chain_shapes(obs_dim, 1, hidden);
        let params = xavier_init(&shapes, rng)?;
        Ok(ValueFn { params })
    }

    pub fn from_params(params: ParameterSet) -> Result<Self> {
        params.validate()?;
        if params.out_dim() != 1 {
            return Err(NnError::Shape(format!(
                "value function must output 1 scalar, got {}",
                params.out_dim()
            )));
        }
        Ok(ValueFn { params })
    }

    pub fn obs_dim(&self) -> usize {
        self.params.in_dim()
    }

    pub fn value(&self, obs: &[f64]) -> Result<f64> {
        Ok(mlp_forward(&self.params, obs)?[0])
    }
}

/// `(in, out)` shapes for input -> hidden... -> output.
fn chain_shapes(in_dim: usize, out_dim: usize, hidden: &[usize]) -> Vec<(usize, usize)> {
    let mut shapes = Vec::with_capacity(hidden.len() + 1);
    let mut prev = in_dim;
    for &h in hidden {
        shapes.push((prev, h));
        prev = h;
    }
    shapes.push((prev, out_dim));
    shapes
}
