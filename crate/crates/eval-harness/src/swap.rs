//! Adversary-swap matrices: how well does the agent from seed `s` hold up
//! against the adversaries trained in seed `s'`?
//!
//! The diagonal is self-play (the pairing each agent trained against);
//! off-diagonal cells pit an agent against adversaries it has never seen.
//! An agent that merely memorized its own adversary collapses off-diagonal.

use env_suite::{DynamicsParams, EnvId};
use nn_core::{GaussianPolicy, SeedStreams};
use rand::Rng;

use crate::error::{EvalError, Result};
use crate::rollout_eval::rollout_returns;
use crate::score::EvalScore;

/// S×S grid of scores; `scores[s][t]` pools the returns of agent
/// `seeds[s]` against every adversary of seed `seeds[t]`.
#[derive(Debug, Clone)]
pub struct SwapMatrix {
    pub seeds: Vec<u64>,
    /// Perturbation strength the adversaries act at (the training strength).
    pub alpha: f64,
    pub scores: Vec<Vec<EvalScore>>,
}

/// Evaluate every agent × adversary-set pairing.
///
/// `agents[s]` and `adversary_sets[s]` must come from the same run, labeled
/// `seeds[s]`. Every set must hold the same number of adversaries. A cell's
/// rng derives from the two seed *labels* involved (not matrix positions),
/// so reordering the seed list permutes rows and columns without changing
/// any value.
#[allow(clippy::too_many_arguments)]
pub fn swap_matrix(
    seeds: &[u64],
    agents: &[GaussianPolicy],
    adversary_sets: &[Vec<GaussianPolicy>],
    env_id: EnvId,
    alpha: f64,
    horizon: usize,
    n_rollouts: usize,
    eval_seed: u64,
) -> Result<SwapMatrix> {
    if seeds.is_empty() {
        return Err(EvalError::Config("swap matrix needs at least one seed".into()));
    }
    if agents.len() != seeds.len() || adversary_sets.len() != seeds.len() {
        return Err(EvalError::Config(format!(
            "got {} seeds, {} agents, {} adversary sets — all three must match",
            seeds.len(),
            agents.len(),
            adversary_sets.len()
        )));
    }
    let n = adversary_sets[0].len();
    if n == 0 {
        return Err(EvalError::Config("adversary sets are empty".into()));
    }
    if let Some((t, set)) = adversary_sets
        .iter()
        .enumerate()
        .find(|(_, set)| set.len() != n)
    {
        return Err(EvalError::Config(format!(
            "adversary set for seed {} holds {} adversaries, expected {n}",
            seeds[t],
            set.len()
        )));
    }

    let streams = SeedStreams::new(eval_seed);
    let params = DynamicsParams::nominal(env_id);
    let scores = seeds
        .iter()
        .enumerate()
        .map(|(s, &agent_seed)| {
            seeds
                .iter()
                .enumerate()
                .map(|(t, &adv_seed)| {
                    let mut pooled = Vec::with_capacity(n * n_rollouts);
                    for (k, adversary) in adversary_sets[t].iter().enumerate() {
                        let cell_seed: u64 = streams
                            .stream(&format!("swap-{agent_seed}-{adv_seed}"), k as u64)
                            .gen();
                        let returns = rollout_returns(
                            &agents[s],
                            Some((adversary, alpha)),
                            env_id,
                            &params,
                            horizon,
                            n_rollouts,
                            cell_seed,
                        )?;
                        pooled.extend(returns);
                    }
                    EvalScore::from_returns(&pooled)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SwapMatrix {
        seeds: seeds.to_vec(),
        alpha,
        scores,
    })
}

impl SwapMatrix {
    /// Mean of the diagonal (self-play) cells.
    pub fn diagonal_mean(&self) -> f64 {
        let s = self.seeds.len();
        (0..s).map(|i| self.scores[i][i].mean).sum::<f64>() / s as f64
    }

    /// Mean of the off-diagonal (swapped) cells; diagonal value for S = 1.
    pub fn off_diagonal_mean(&self) -> f64 {
        let s = self.seeds.len();
        if s == 1 {
            return self.scores[0][0].mean;
        }
        let mut total = 0.0;
        for i in 0..s {
            for j in 0..s {
                if i != j {
                    total += self.scores[i][j].mean;
                }
            }
        }
        total / (s * (s - 1)) as f64
    }
}
