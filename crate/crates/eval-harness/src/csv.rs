//! Plain-text CSV renderers for evaluation artifacts.
//!
//! Every file starts with a `#` comment line identifying the run (config
//! hash and seed), so a table can always be traced back to the exact
//! configuration that produced it. Numbers are written with Rust's shortest
//! round-trip float formatting: re-parsing a cell recovers the exact value,
//! and identical inputs render byte-identical files.

use std::fmt::Write;

use crate::grid::{CellOutcome, TransferGrid};
use crate::holdout::HoldoutReport;
use crate::swap::SwapMatrix;
use crate::sweep::SweepReport;

fn score_cell(mean: f64, std: f64) -> String {
    format!("{mean};{std}")
}

/// Transfer grid as CSV: header row carries the friction values, the first
/// column carries the mass values, and each cell is `mean;std` (or `failed`).
pub fn grid_to_csv(grid: &TransferGrid, comment: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {comment}");
    let header: Vec<String> = grid.friction_values.iter().map(|f| f.to_string()).collect();
    let _ = writeln!(out, "mass\\friction,{}", header.join(","));
    for (mass, row) in grid.mass_values.iter().zip(grid.cells.iter()) {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                CellOutcome::Score(s) => score_cell(s.mean, s.std),
                CellOutcome::Failed(_) => "failed".to_string(),
            })
            .collect();
        let _ = writeln!(out, "{mass},{}", cells.join(","));
    }
    out
}

/// Swap matrix as CSV with seed labels on both axes and `mean;std` cells.
pub fn swap_to_csv(matrix: &SwapMatrix, comment: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {comment}");
    let _ = writeln!(out, "# adversary strength alpha={}", matrix.alpha);
    let header: Vec<String> = matrix.seeds.iter().map(|s| format!("adv_seed_{s}")).collect();
    let _ = writeln!(out, "agent_seed,{}", header.join(","));
    for (seed, row) in matrix.seeds.iter().zip(matrix.scores.iter()) {
        let cells: Vec<String> = row.iter().map(|s| score_cell(s.mean, s.std)).collect();
        let _ = writeln!(out, "{seed},{}", cells.join(","));
    }
    out
}

/// Holdout report as CSV rows `test,mean,std`, closed by an `aggregate` row.
/// The aggregate row's std column stays empty: spreads are per-test only.
pub fn holdout_to_csv(report: &HoldoutReport, comment: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {comment}");
    let _ = writeln!(out, "test,mean,std");
    for (name, score) in &report.tests {
        let _ = writeln!(out, "{name},{},{}", score.mean, score.std);
    }
    let _ = writeln!(out, "aggregate,{},", report.aggregate_mean);
    out
}

/// Sweep report as one CSV row per adversary count.
pub fn sweep_to_csv(report: &SweepReport, comment: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {comment}");
    let _ = writeln!(
        out,
        "adversaries,grid_mean,grid_std,holdout_mean,holdout_std,seeds_ok,env_steps"
    );
    for row in &report.rows {
        let steps = report
            .cells
            .iter()
            .filter(|c| c.count == row.count)
            .find_map(|c| c.outcome.as_ref().ok().map(|m| m.env_steps));
        let steps = steps.map_or(String::new(), |s| s.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{steps}",
            row.count, row.grid_mean, row.grid_std, row.holdout_mean, row.holdout_std, row.seeds_ok
        );
    }
    out
}
