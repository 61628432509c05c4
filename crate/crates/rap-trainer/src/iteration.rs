//! The training loop: collect a batch of episodes (sampling one adversary
//! per rollout in population modes), update the agent on everything, then
//! update each adversary only on the episodes it played.

use std::path::{Path, PathBuf};

use env_suite::{dr_sample, DynamicsParams};
use nn_core::{save_checkpoint, SeedStreams};
use ppo_learner::{ppo_update, Trajectory, UpdateStats};

use crate::config::{Mode, TrainConfig};
use crate::error::{Result, TrainError};
use crate::population::{init_population, sample_adversary, PopulationState};
use crate::rollout::collect_rollout;

/// Per-iteration record for the training curve.
#[derive(Debug, Clone)]
pub struct IterationStats {
    /// 0-based iteration index.
    pub iteration: u64,
    /// Episodes collected this iteration.
    pub rollouts: usize,
    /// Agent transitions collected this iteration (environment steps).
    pub env_steps: usize,
    /// Mean per-episode agent return.
    pub mean_return: f64,
    /// Population standard deviation of per-episode agent returns.
    pub std_return: f64,
    /// Episodes each adversary played (`adversary_rollouts[i-1]` for
    /// adversary `i`); empty in non-adversarial modes.
    pub adversary_rollouts: Vec<usize>,
    pub agent: UpdateStats,
    /// Update stats per adversary; all-zero defaults for adversaries that
    /// played no episode and were therefore left untouched.
    pub adversaries: Vec<UpdateStats>,
}

/// Collect one batch and update every policy that played.
///
/// Episode collection is driven by per-rollout rng streams keyed on the
/// global rollout counter, so the episode sequence is independent of how
/// work is grouped into iterations. In budget mode (no fixed rollout count)
/// the final episode is truncated so the iteration contributes exactly
/// `ppo.train_batch_size` environment steps regardless of population size.
pub fn train_iteration(state: &mut PopulationState, cfg: &TrainConfig) -> Result<IterationStats> {
    cfg.validate()?;
    if state.adversaries.len() != cfg.n {
        return Err(TrainError::Config(format!(
            "state holds {} adversaries but the config says n = {}",
            state.adversaries.len(),
            cfg.n
        )));
    }
    if state.agent.policy.obs_dim() != cfg.env_id.obs_dim() {
        return Err(TrainError::Config(format!(
            "agent expects {}-dim observations, environment provides {}",
            state.agent.policy.obs_dim(),
            cfg.env_id.obs_dim()
        )));
    }

    let streams = SeedStreams::new(cfg.seed);
    let mut agent_trajectories: Vec<Trajectory> = Vec::new();
    let mut adversary_trajectories: Vec<Vec<Trajectory>> = vec![Vec::new(); cfg.n];
    let mut adversary_rollouts = vec![0usize; cfg.n];
    let mut episode_returns = Vec::new();
    let mut collected = 0usize;
    let mut rollouts_this_iteration = 0usize;

    loop {
        match cfg.rollouts_per_iteration {
            Some(count) if rollouts_this_iteration >= count => break,
            None if collected >= cfg.ppo.train_batch_size => break,
            _ => {}
        }

        let k = state.rollouts_collected;
        let mut env_rng = streams.stream("rollout-env", k);
        let mut agent_rng = streams.stream("rollout-agent", k);
        let mut adversary_rng = streams.stream("rollout-adversary", k);

        let adversary = if cfg.mode.is_adversarial() {
            let mut pick_rng = streams.stream("rollout-pick", k);
            let i = sample_adversary(cfg.n, &mut pick_rng)?;
            Some((i, &state.adversaries[i - 1]))
        } else {
            None
        };
        let params = if cfg.mode == Mode::DomainRandomization {
            let spec = cfg.domain_spec.as_ref().expect("validated: DR mode has a spec");
            let mut dr_rng = streams.stream("rollout-dr", k);
            dr_sample(spec, &mut dr_rng)
        } else {
            DynamicsParams::nominal(cfg.env_id)
        };
        let max_transitions = match cfg.rollouts_per_iteration {
            Some(_) => cfg.horizon,
            None => cfg.ppo.train_batch_size - collected,
        };

        let (tau_agent, tau_adversary) = collect_rollout(
            &state.agent,
            adversary,
            cfg.env_id,
            &params,
            cfg.alpha,
            cfg.horizon,
            max_transitions,
            &mut env_rng,
            &mut agent_rng,
            &mut adversary_rng,
        )?;

        collected += tau_agent.len();
        episode_returns.push(tau_agent.episode_return());
        if let Some(tau) = tau_adversary {
            let i = tau.adversary_index.expect("adversary trajectories carry their id");
            adversary_rollouts[i - 1] += 1;
            adversary_trajectories[i - 1].push(tau);
        }
        agent_trajectories.push(tau_agent);
        state.rollouts_collected += 1;
        rollouts_this_iteration += 1;
    }

    let iteration = state.iterations_done;
    let mut agent_shuffle = streams.stream("update-agent", iteration);
    let (new_policy, new_value, agent_stats) = ppo_update(
        &state.agent.policy,
        &state.agent.value,
        &mut state.agent.opt,
        &agent_trajectories,
        &cfg.ppo,
        &mut agent_shuffle,
    )?;
    state.agent.policy = new_policy;
    state.agent.value = new_value;

    let mut adversary_stats = vec![UpdateStats::default(); cfg.n];
    for i in 1..=cfg.n {
        let trajectories = &adversary_trajectories[i - 1];
        if trajectories.is_empty() {
            continue; // played nothing, learns nothing, stays bit-identical
        }
        let bundle = &mut state.adversaries[i - 1];
        let mut shuffle = streams.stream(&format!("update-adversary-{i}"), iteration);
        let (p, v, stats) = ppo_update(
            &bundle.policy,
            &bundle.value,
            &mut bundle.opt,
            trajectories,
            &cfg.ppo,
            &mut shuffle,
        )?;
        bundle.policy = p;
        bundle.value = v;
        adversary_stats[i - 1] = stats;
    }

    state.iterations_done += 1;
    state.env_steps += collected as u64;

    let count = episode_returns.len() as f64;
    let mean_return = episode_returns.iter().sum::<f64>() / count;
    let variance = episode_returns
        .iter()
        .map(|r| (r - mean_return) * (r - mean_return))
        .sum::<f64>()
        / count;
    Ok(IterationStats {
        iteration,
        rollouts: rollouts_this_iteration,
        env_steps: collected,
        mean_return,
        std_return: variance.sqrt(),
        adversary_rollouts,
        agent: agent_stats,
        adversaries: adversary_stats,
    })
}

/// Write one checkpoint per policy (`agent.ckpt`, `adversary_1.ckpt`, ...)
/// into `dir`, atomically. Returns the paths written.
pub fn checkpoint_population(
    state: &PopulationState,
    seed: u64,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(1 + state.adversaries.len());
    let agent_path = dir.join("agent.ckpt");
    save_checkpoint(&agent_path, &state.agent.policy.params, seed)?;
    written.push(agent_path);
    for (idx, adversary) in state.adversaries.iter().enumerate() {
        let path = dir.join(format!("adversary_{}.ckpt", idx + 1));
        save_checkpoint(&path, &adversary.policy.params, seed)?;
        written.push(path);
    }
    Ok(written)
}

/// Run a full training job: initialize, iterate, checkpoint periodically
/// (and always at the end) when a checkpoint directory is given.
///
/// Checkpoints are written atomically, so a mid-run failure leaves the most
/// recently completed checkpoint set intact.
pub fn train(
    cfg: &TrainConfig,
    checkpoint_dir: Option<&Path>,
) -> Result<(PopulationState, Vec<IterationStats>)> {
    cfg.validate()?;
    let mut state = init_population(cfg)?;
    let mut curve = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        let stats = train_iteration(&mut state, cfg)?;
        curve.push(stats);
        if let Some(dir) = checkpoint_dir {
            if (it + 1) % cfg.checkpoint_every == 0 && it + 1 < cfg.iterations {
                checkpoint_population(&state, cfg.seed, dir)?;
            }
        }
    }
    if let Some(dir) = checkpoint_dir {
        checkpoint_population(&state, cfg.seed, dir)?;
    }
    Ok((state, curve))
}
