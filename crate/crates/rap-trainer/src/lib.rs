//! Adversarially robust policy training.
//!
//! The trainer couples a protagonist agent with a population of adversaries
//! that perturb its actions. Each rollout samples one adversary uniformly at
//! random; rewards are exactly zero-sum between the two sides. The agent
//! updates on every episode of the batch, while each adversary updates only
//! on the episodes it personally played — adversaries that sat out an
//! iteration are left bit-identical.
//!
//! Four training modes share one code path: `rap` (population of `n`
//! adversaries), `single_adversary` (the population of one), `vanilla` (no
//! adversary at all), and `domain_randomization` (no adversary, dynamics
//! redrawn per rollout). Runs are reproducible end to end from a single seed
//! via named rng substreams keyed on the global rollout counter.

mod config;
mod error;
mod iteration;
mod population;
mod rollout;

pub use config::{Mode, TrainConfig};
pub use error::{Result, TrainError};
pub use iteration::{checkpoint_population, train, train_iteration, IterationStats};
pub use population::{init_population, sample_adversary, PolicyBundle, PopulationState};
pub use rollout::collect_rollout;
