//! Proximal policy optimization for the robust-control laboratory.
//!
//! The pieces, in data-flow order:
//!
//! 1. [`Trajectory`] / [`StepRecord`] — transitions as collected, with the
//!    sampled action's log density and the value estimate frozen at rollout
//!    time;
//! 2. [`gae`] — per-episode advantage estimation;
//! 3. [`BatchData`] + [`loss_and_grads`] — the clipped-surrogate objective
//!    and its gradients via one reverse sweep over both networks;
//! 4. [`ppo_update`] — advantage normalization, shuffled minibatches, Adam.
//!
//! Everything is deterministic given its inputs and the shuffle generator;
//! full-batch updates do not touch the generator at all.

pub mod config;
pub mod error;
pub mod gae;
pub mod loss;
pub mod trajectory;
pub mod update;

pub use config::PpoConfig;
pub use error::{PpoError, Result};
pub use gae::gae;
pub use loss::{loss_and_grads, BatchData, LossParts};
pub use trajectory::{StepRecord, Trajectory};
pub use update::{ppo_update, PpoOptimizer, UpdateStats, ADV_NORM_EPS};
