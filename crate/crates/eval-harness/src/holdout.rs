//! Holdout-suite evaluation: score a policy on each out-of-distribution
//! test and report the unweighted average across tests.

use env_suite::{DynamicsParams, EnvId};
use nn_core::GaussianPolicy;

use crate::error::{EvalError, Result};
use crate::rollout_eval::evaluate;
use crate::score::EvalScore;

/// Per-test scores plus the across-tests average of means. Standard
/// deviations stay per-test; averaging them across different dynamics would
/// blend unrelated distributions.
#[derive(Debug, Clone)]
pub struct HoldoutReport {
    pub tests: Vec<(String, EvalScore)>,
    pub aggregate_mean: f64,
}

/// Evaluate `agent` on every named parameter set of a holdout suite.
pub fn holdout_eval(
    agent: &GaussianPolicy,
    env_id: EnvId,
    suite: &[(String, DynamicsParams)],
    horizon: usize,
    n_rollouts: usize,
    seed: u64,
) -> Result<HoldoutReport> {
    if suite.is_empty() {
        return Err(EvalError::Config("holdout suite is empty".into()));
    }
    let tests = suite
        .iter()
        .map(|(name, params)| {
            evaluate(agent, env_id, params, horizon, n_rollouts, seed)
                .map(|score| (name.clone(), score))
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregate_mean = tests.iter().map(|(_, s)| s.mean).sum::<f64>() / tests.len() as f64;
    Ok(HoldoutReport {
        tests,
        aggregate_mean,
    })
}
