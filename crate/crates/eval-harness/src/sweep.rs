//! Adversary-count sweeps: train one population per (count, seed) pair under
//! a fixed environment-step budget, then compare validation-grid and holdout
//! performance as the population grows.

use rap_trainer::{train, Mode, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{EvalError, Result};
use crate::grid::transfer_grid;
use crate::holdout::holdout_eval;

/// What and how much to evaluate after training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSpec {
    pub mass_range: (f64, f64),
    pub friction_range: (f64, f64),
    pub grid_points: usize,
    pub holdout_hi: f64,
    pub holdout_lo: f64,
    pub n_rollouts: usize,
}

impl Default for EvalSpec {
    fn default() -> Self {
        EvalSpec {
            mass_range: (0.7, 1.3),
            friction_range: (0.7, 1.3),
            grid_points: 5,
            holdout_hi: 1.3,
            holdout_lo: 0.7,
            n_rollouts: 20,
        }
    }
}

impl EvalSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(EvalError::Config(format!(
                "grid_points must be at least 2, got {}",
                self.grid_points
            )));
        }
        if self.n_rollouts == 0 {
            return Err(EvalError::Config("n_rollouts must be at least 1".into()));
        }
        for (name, (lo, hi)) in [
            ("mass_range", self.mass_range),
            ("friction_range", self.friction_range),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi < lo {
                return Err(EvalError::Config(format!(
                    "{name} must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
                )));
            }
        }
        if !(self.holdout_lo.is_finite() && self.holdout_hi.is_finite())
            || self.holdout_lo <= 0.0
            || self.holdout_hi <= self.holdout_lo
        {
            return Err(EvalError::Config(format!(
                "holdout coefficients must satisfy 0 < lo < hi, got lo={}, hi={}",
                self.holdout_lo, self.holdout_hi
            )));
        }
        Ok(())
    }
}

/// Outcome of one (count, seed) training-plus-evaluation run.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub count: usize,
    pub seed: u64,
    pub outcome: std::result::Result<SweepMeasurement, String>,
}

/// The numbers a successful cell contributes.
#[derive(Debug, Clone, Copy)]
pub struct SweepMeasurement {
    pub grid_mean: f64,
    pub holdout_mean: f64,
    /// Total environment steps the training run consumed.
    pub env_steps: u64,
}

/// Across-seeds aggregate for one adversary count.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub count: usize,
    pub seeds_ok: usize,
    pub grid_mean: f64,
    pub grid_std: f64,
    pub holdout_mean: f64,
    pub holdout_std: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub rows: Vec<SweepRow>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Train an adversary population of each size in `counts` for every seed,
/// then score each trained agent on the validation grid and holdout suite.
///
/// Every run uses the same step budget (`base.ppo.train_batch_size` ×
/// `base.iterations`), so counts compete on equal footing. A failed
/// (count, seed) run is recorded in its cell; the sweep continues.
pub fn adversary_count_sweep(
    base: &TrainConfig,
    counts: &[usize],
    seeds: &[u64],
    spec: &EvalSpec,
) -> Result<SweepReport> {
    if counts.is_empty() || seeds.is_empty() {
        return Err(EvalError::Config(
            "sweep needs at least one count and one seed".into(),
        ));
    }
    if let Some(&bad) = counts.iter().find(|&&c| c == 0) {
        return Err(EvalError::Config(format!(
            "adversary counts must be at least 1, got {bad}"
        )));
    }
    if base.rollouts_per_iteration.is_some() {
        return Err(EvalError::Config(
            "sweep requires the exact step budget (rollouts_per_iteration must be unset)".into(),
        ));
    }
    spec.validate()?;
    let suite = env_suite::holdout_suite(base.env_id, spec.holdout_hi, spec.holdout_lo)?;

    let mut cells = Vec::with_capacity(counts.len() * seeds.len());
    for &count in counts {
        for &seed in seeds {
            let cfg = TrainConfig {
                mode: Mode::Rap,
                n: count,
                seed,
                domain_spec: None,
                ..base.clone()
            };
            let outcome = run_cell(&cfg, spec, &suite);
            cells.push(SweepCell {
                count,
                seed,
                outcome: outcome.map_err(|e| e.to_string()),
            });
        }
    }

    let rows = counts
        .iter()
        .map(|&count| {
            let ok: Vec<&SweepMeasurement> = cells
                .iter()
                .filter(|c| c.count == count)
                .filter_map(|c| c.outcome.as_ref().ok())
                .collect();
            if ok.is_empty() {
                return SweepRow {
                    count,
                    seeds_ok: 0,
                    grid_mean: f64::NAN,
                    grid_std: f64::NAN,
                    holdout_mean: f64::NAN,
                    holdout_std: f64::NAN,
                };
            }
            let grids: Vec<f64> = ok.iter().map(|m| m.grid_mean).collect();
            let holds: Vec<f64> = ok.iter().map(|m| m.holdout_mean).collect();
            let (grid_mean, grid_std) = mean_std(&grids);
            let (holdout_mean, holdout_std) = mean_std(&holds);
            SweepRow {
                count,
                seeds_ok: ok.len(),
                grid_mean,
                grid_std,
                holdout_mean,
                holdout_std,
            }
        })
        .collect();

    Ok(SweepReport { cells, rows })
}

fn run_cell(
    cfg: &TrainConfig,
    spec: &EvalSpec,
    suite: &[(String, env_suite::DynamicsParams)],
) -> Result<SweepMeasurement> {
    let (state, _curve) = train(cfg, None)?;
    let grid = transfer_grid(
        &state.agent.policy,
        cfg.env_id,
        spec.mass_range,
        spec.friction_range,
        spec.grid_points,
        cfg.horizon,
        spec.n_rollouts,
        cfg.seed,
    )?;
    let holdout = holdout_eval(
        &state.agent.policy,
        cfg.env_id,
        suite,
        cfg.horizon,
        spec.n_rollouts,
        cfg.seed,
    )?;
    Ok(SweepMeasurement {
        grid_mean: grid.aggregate_mean()?,
        holdout_mean: holdout.aggregate_mean,
        env_steps: state.env_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use env_suite::EnvId;
    use ppo_learner::PpoConfig;

    fn tiny_base() -> TrainConfig {
        TrainConfig {
            mode: Mode::Rap,
            env_id: EnvId::SwingPendulum,
            n: 1,
            ppo: PpoConfig {
                train_batch_size: 120,
                sgd_epochs: 1,
                ..PpoConfig::default()
            },
            horizon: 30,
            iterations: 1,
            ..TrainConfig::default()
        }
    }

    fn tiny_spec() -> EvalSpec {
        EvalSpec {
            grid_points: 2,
            n_rollouts: 2,
            ..EvalSpec::default()
        }
    }

    #[test]
    fn sweep_produces_one_row_per_count_with_equal_step_budgets() {
        let report =
            adversary_count_sweep(&tiny_base(), &[1, 2], &[5], &tiny_spec()).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.cells.len(), 2);
        let steps: Vec<u64> = report
            .cells
            .iter()
            .map(|c| c.outcome.as_ref().unwrap().env_steps)
            .collect();
        assert_eq!(steps[0], steps[1], "step budgets must match exactly");
        assert_eq!(steps[0], 120);
        for row in &report.rows {
            assert_eq!(row.seeds_ok, 1);
            assert!(row.grid_mean.is_finite());
            assert!(row.holdout_mean.is_finite());
            assert_eq!(row.grid_std, 0.0); // one seed → no spread
        }
    }

    #[test]
    fn multiple_seeds_aggregate_into_mean_and_spread() {
        let report =
            adversary_count_sweep(&tiny_base(), &[1], &[5, 6], &tiny_spec()).unwrap();
        assert_eq!(report.cells.len(), 2);
        let row = &report.rows[0];
        assert_eq!(row.seeds_ok, 2);
        let means: Vec<f64> = report
            .cells
            .iter()
            .map(|c| c.outcome.as_ref().unwrap().grid_mean)
            .collect();
        let (expected_mean, expected_std) = mean_std(&means);
        assert!((row.grid_mean - expected_mean).abs() < 1e-12);
        assert!((row.grid_std - expected_std).abs() < 1e-12);
    }

    #[test]
    fn degenerate_sweep_requests_are_rejected() {
        let base = tiny_base();
        let spec = tiny_spec();
        assert!(adversary_count_sweep(&base, &[], &[1], &spec).is_err());
        assert!(adversary_count_sweep(&base, &[1], &[], &spec).is_err());
        assert!(adversary_count_sweep(&base, &[0], &[1], &spec).is_err());
        let fixed = TrainConfig {
            rollouts_per_iteration: Some(2),
            ..base
        };
        assert!(adversary_count_sweep(&fixed, &[1], &[1], &spec).is_err());
    }
}
