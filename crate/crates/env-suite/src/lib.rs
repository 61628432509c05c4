//! Two analytic continuous-control environments (an east-walking point mass
//! in lateral wind, and a torque-limited pendulum swing-up), parameterized
//! by mass and per-component friction scales.
//!
//! Around them: the perturbed-action wrapper that adds a bounded adversary
//! action onto the agent's action ([`combine_actions`]), uniform domain
//! randomization over parameter intervals ([`dr_sample`]), and the holdout
//! suite builder for out-of-distribution hi/lo parameter assignments
//! ([`holdout_suite`]).

pub mod combine;
pub mod env;
pub mod error;
pub mod holdout;
pub mod params;

pub use combine::{clip_agent, clip_adversary, combine_actions, ADVERSARY_BOUND, AGENT_BOUND};
pub use env::{wrap_angle, Env, EnvId, StepResult, DEFAULT_HORIZON, DT};
pub use error::{EnvError, Result};
pub use holdout::holdout_suite;
pub use params::{dr_sample, DomainSpec, DynamicsParams, Interval};
