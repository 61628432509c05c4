//! Validation transfer grids: evaluate a policy across a Cartesian grid of
//! scalar mass and friction coefficients, without any adversary.

use env_suite::{DynamicsParams, EnvId};
use nn_core::GaussianPolicy;

use crate::error::{EvalError, Result};
use crate::rollout_eval::evaluate;
use crate::score::EvalScore;

/// One grid cell: either a score or the reason evaluation failed there.
#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Score(EvalScore),
    Failed(String),
}

impl CellOutcome {
    pub fn score(&self) -> Option<&EvalScore> {
        match self {
            CellOutcome::Score(s) => Some(s),
            CellOutcome::Failed(_) => None,
        }
    }
}

/// Scores over a mass × friction grid. `cells[i][j]` pairs `mass_values[i]`
/// with `friction_values[j]`.
#[derive(Debug, Clone)]
pub struct TransferGrid {
    pub mass_values: Vec<f64>,
    pub friction_values: Vec<f64>,
    pub cells: Vec<Vec<CellOutcome>>,
}

impl TransferGrid {
    /// True when every cell evaluated successfully.
    pub fn is_complete(&self) -> bool {
        self.cells
            .iter()
            .all(|row| row.iter().all(|c| c.score().is_some()))
    }

    /// Unweighted mean of cell means — "performs well on average across the
    /// distribution". Fails if any cell failed.
    pub fn aggregate_mean(&self) -> Result<f64> {
        let mut total = 0.0;
        let mut count = 0usize;
        for (i, row) in self.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                match cell {
                    CellOutcome::Score(s) => {
                        total += s.mean;
                        count += 1;
                    }
                    CellOutcome::Failed(why) => {
                        return Err(EvalError::Config(format!(
                            "grid cell ({i}, {j}) failed: {why}"
                        )))
                    }
                }
            }
        }
        Ok(total / count as f64)
    }
}

/// `k` evenly spaced values from `lo` to `hi` inclusive, computed as the
/// convex combination `lo·(1−t) + hi·t` so both endpoints are exact.
pub fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    assert!(k >= 2, "linspace needs at least two points");
    (0..k)
        .map(|i| {
            let t = i as f64 / (k - 1) as f64;
            lo * (1.0 - t) + hi * t
        })
        .collect()
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || lo <= 0.0 || hi < lo {
        return Err(EvalError::Config(format!(
            "{name} range must satisfy 0 < lo <= hi and be finite, got [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Evaluate `agent` on every (mass, friction) pair of a `grid_points` ×
/// `grid_points` grid spanning the given ranges. The same friction scale is
/// applied to every friction component. Cell-level failures are recorded in
/// place and the rest of the grid still completes.
#[allow(clippy::too_many_arguments)]
pub fn transfer_grid(
    agent: &GaussianPolicy,
    env_id: EnvId,
    mass_range: (f64, f64),
    friction_range: (f64, f64),
    grid_points: usize,
    horizon: usize,
    n_rollouts: usize,
    seed: u64,
) -> Result<TransferGrid> {
    if grid_points < 2 {
        return Err(EvalError::Config(format!(
            "grid needs at least 2 points per axis, got {grid_points}"
        )));
    }
    check_range("mass", mass_range)?;
    check_range("friction", friction_range)?;

    let mass_values = linspace(mass_range.0, mass_range.1, grid_points);
    let friction_values = linspace(friction_range.0, friction_range.1, grid_points);
    let cells = mass_values
        .iter()
        .map(|&m| {
            friction_values
                .iter()
                .map(|&f| {
                    let params = DynamicsParams::scalar(env_id, m, f);
                    match evaluate(agent, env_id, &params, horizon, n_rollouts, seed) {
                        Ok(score) => CellOutcome::Score(score),
                        Err(why) => CellOutcome::Failed(why.to_string()),
                    }
                })
                .collect()
        })
        .collect();

    Ok(TransferGrid {
        mass_values,
        friction_values,
        cells,
    })
}
