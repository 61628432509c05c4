//! Evaluation harness for trained policies.
//!
//! Answers the questions a robustness study asks after training: how does a
//! policy hold up across a grid of dynamics (mass × friction transfer), on
//! out-of-distribution holdout tests, and against adversaries it has never
//! trained with (swap matrices)? The adversary-count sweep ties it together
//! by training populations of different sizes under one fixed step budget
//! and comparing their transfer scores.
//!
//! Every entry point takes an explicit seed and derives per-episode rng
//! substreams from it, so reports are bit-reproducible and individual
//! episodes can be replayed in isolation.

mod csv;
mod error;
mod grid;
mod holdout;
mod rollout_eval;
mod score;
mod swap;
mod sweep;

pub use csv::{grid_to_csv, holdout_to_csv, swap_to_csv, sweep_to_csv};
pub use error::{EvalError, Result};
pub use grid::{linspace, transfer_grid, CellOutcome, TransferGrid};
pub use holdout::{holdout_eval, HoldoutReport};
pub use rollout_eval::{evaluate, evaluate_with_adversary, rollout_returns};
pub use score::EvalScore;
pub use swap::{swap_matrix, SwapMatrix};
pub use sweep::{adversary_count_sweep, EvalSpec, SweepCell, SweepMeasurement, SweepReport, SweepRow};
