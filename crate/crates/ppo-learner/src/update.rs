//! One proximal update: assemble a batch from trajectories, normalize
//! advantages, then run clipped-objective SGD epochs over shuffled
//! minibatches with Adam.
//!
//! When the minibatch size covers the whole batch the shuffle is skipped
//! entirely, so full-batch updates neither consume the shuffle generator nor
//! depend on it — they are a pure function of the inputs.

use nn_core::{adam_step, GaussianPolicy, NnError, OptimizerState, Tensor, ValueFn};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::config::PpoConfig;
use crate::error::{PpoError, Result};
use crate::gae::gae;
use crate::loss::{loss_and_grads, BatchData};
use crate::trajectory::Trajectory;

/// Denominator guard when scaling advantages to unit spread.
pub const ADV_NORM_EPS: f64 = 1e-8;

/// Adam state for the policy and value networks, updated in lock step.
#[derive(Debug, Clone)]
pub struct PpoOptimizer {
    pub policy: OptimizerState,
    pub value: OptimizerState,
}

impl PpoOptimizer {
    pub fn new(policy: &GaussianPolicy, value_fn: &ValueFn) -> Self {
        PpoOptimizer {
            policy: OptimizerState::new(&policy.params),
            value: OptimizerState::new(&value_fn.params),
        }
    }
}

/// What one [`ppo_update`] call did, for logging and training curves.
#[derive(Debug, Clone, Copy, Default)]
pub struct UpdateStats {
    /// Transitions in the assembled batch.
    pub transitions: usize,
    /// Minibatch gradient steps actually applied.
    pub minibatch_updates: usize,
    /// Minibatches dropped because their loss or gradients were non-finite.
    pub skipped_nonfinite: usize,
    /// True when there was no data at all; parameters are returned untouched.
    pub noop: bool,
    /// Mean total loss over applied minibatches.
    pub loss: f64,
    /// Mean clipped surrogate over applied minibatches.
    pub surrogate: f64,
    /// Mean value regression loss over applied minibatches.
    pub value_loss: f64,
    /// Mean policy entropy over applied minibatches.
    pub entropy: f64,
    /// Mean combined gradient norm over applied minibatches.
    pub grad_norm: f64,
    /// `mean(logp_old - logp_new)` over the whole batch after the update.
    pub kl: f64,
}

/// Scale to mean 0 and unit spread (population std, guarded by
/// [`ADV_NORM_EPS`] so a constant batch maps to zeros).
fn normalize_advantages(advs: &mut [f64]) {
    let n = advs.len() as f64;
    let mean = advs.iter().sum::<f64>() / n;
    let var = advs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let denom = var.sqrt() + ADV_NORM_EPS;
    for a in advs.iter_mut() {
        *a = (*a - mean) / denom;
    }
}

/// Flatten trajectories into one batch: advantage estimation per episode,
/// then normalization across everything collected this iteration.
fn assemble_batch(
    policy: &GaussianPolicy,
    trajectories: &[Trajectory],
    cfg: &PpoConfig,
) -> Result<BatchData> {
    let obs_dim = policy.obs_dim();
    let action_dim = policy.action_dim();
    let total: usize = trajectories.iter().map(Trajectory::len).sum();

    let mut obs_data = Vec::with_capacity(total * obs_dim);
    let mut act_data = Vec::with_capacity(total * action_dim);
    let mut logp_data = Vec::with_capacity(total);
    let mut adv_data = Vec::with_capacity(total);
    let mut ret_data = Vec::with_capacity(total);

    for traj in trajectories {
        traj.validate()?;
        let rewards: Vec<f64> = traj.steps.iter().map(|s| s.reward).collect();
        let values: Vec<f64> = traj.steps.iter().map(|s| s.value_old).collect();
        let (advantages, returns) =
            gae(&rewards, &values, traj.bootstrap_value, cfg.gamma, cfg.lam)?;
        for (step, (adv, ret)) in traj
            .steps
            .iter()
            .zip(advantages.iter().zip(returns.iter()))
        {
            if step.obs.len() != obs_dim {
                return Err(PpoError::Shape(format!(
                    "observation has {} dims, policy expects {obs_dim}",
                    step.obs.len()
                )));
            }
            if step.action.len() != action_dim {
                return Err(PpoError::Shape(format!(
                    "action has {} dims, policy expects {action_dim}",
                    step.action.len()
                )));
            }
            obs_data.extend_from_slice(&step.obs);
            act_data.extend_from_slice(&step.action);
            logp_data.push(step.logp_old);
            adv_data.push(*adv);
            ret_data.push(*ret);
        }
    }
    normalize_advantages(&mut adv_data);

    BatchData::new(
        Tensor::from_vec(total, obs_dim, obs_data)?,
        Tensor::from_vec(total, action_dim, act_data)?,
        Tensor::from_vec(total, 1, logp_data)?,
        Tensor::from_vec(total, 1, adv_data)?,
        Tensor::from_vec(total, 1, ret_data)?,
    )
}

/// Run one full proximal update and return the new networks plus statistics.
///
/// `rng` drives only the minibatch shuffle. Minibatches whose loss or
/// gradients come out non-finite are skipped (and counted) instead of being
/// applied; all other errors abort the update.
pub fn ppo_update(
    policy: &GaussianPolicy,
    value_fn: &ValueFn,
    optimizer: &mut PpoOptimizer,
    trajectories: &[Trajectory],
    cfg: &PpoConfig,
    rng: &mut impl Rng,
) -> Result<(GaussianPolicy, ValueFn, UpdateStats)> {
    cfg.validate()?;
    let total: usize = trajectories.iter().map(Trajectory::len).sum();
    if total == 0 {
        let stats = UpdateStats {
            noop: true,
            ..UpdateStats::default()
        };
        return Ok((policy.clone(), value_fn.clone(), stats));
    }

    let batch = assemble_batch(policy, trajectories, cfg)?;
    let n = batch.len();
    let full_batch = cfg.minibatch_size >= n;
    let mut indices: Vec<usize> = (0..n).collect();

    let mut policy_params = policy.params.clone();
    let mut value_params = value_fn.params.clone();
    let mut stats = UpdateStats {
        transitions: n,
        ..UpdateStats::default()
    };

    for _epoch in 0..cfg.sgd_epochs {
        if !full_batch {
            indices.shuffle(rng);
        }
        for chunk in indices.chunks(cfg.minibatch_size) {
            let result = if full_batch {
                loss_and_grads(&policy_params, &value_params, &batch, cfg)
            } else {
                let minibatch = batch.gather(chunk);
                loss_and_grads(&policy_params, &value_params, &minibatch, cfg)
            };
            match result {
                Ok((parts, policy_grads, value_grads)) => {
                    let grad_norm = (policy_grads.l2_norm().powi(2)
                        + value_grads.l2_norm().powi(2))
                    .sqrt();
                    let (new_policy, new_state) =
                        adam_step(&policy_params, &policy_grads, &optimizer.policy, cfg.lr)?;
                    policy_params = new_policy;
                    optimizer.policy = new_state;
                    let (new_value, new_state) =
                        adam_step(&value_params, &value_grads, &optimizer.value, cfg.lr)?;
                    value_params = new_value;
                    optimizer.value = new_state;

                    stats.minibatch_updates += 1;
                    stats.loss += parts.total;
                    stats.surrogate += parts.surrogate;
                    stats.value_loss += parts.value_loss;
                    stats.entropy += parts.entropy;
                    stats.grad_norm += grad_norm;
                }
                Err(PpoError::Numeric(_)) | Err(PpoError::Nn(NnError::NonFinite(_))) => {
                    stats.skipped_nonfinite += 1;
                }
                Err(other) => return Err(other),
            }
        }
    }

    if stats.minibatch_updates > 0 {
        let k = stats.minibatch_updates as f64;
        stats.loss /= k;
        stats.surrogate /= k;
        stats.value_loss /= k;
        stats.entropy /= k;
        stats.grad_norm /= k;
    }

    let new_policy = GaussianPolicy::from_params(policy_params)?;
    let new_value = ValueFn::from_params(value_params)?;

    let mut kl_acc = 0.0;
    for i in 0..n {
        let logp_new = new_policy.logp(batch.obs.row_slice(i), batch.actions.row_slice(i))?;
        kl_acc += batch.logp_old.get(i, 0) - logp_new;
    }
    stats.kl = kl_acc / n as f64;

    Ok((new_policy, new_value, stats))
}
