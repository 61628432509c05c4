//! Neural substrate for the robust-control laboratory: tiny `f64` tensors,
//! tanh MLPs with diagonal-Gaussian heads, a reverse-mode autodiff tape,
//! Adam, bit-exact JSON checkpoints, and named reproducible RNG substreams.
//!
//! Everything here is deliberately dependency-light and deterministic: the
//! same seed produces the same network, the same gradients, and the same
//! checkpoint bytes on every run and platform.

pub mod adam;
pub mod ckpt;
pub mod error;
pub mod gaussian;
pub mod mlp;
pub mod params;
pub mod rng;
pub mod tape;
pub mod tensor;

pub use adam::{adam_step, adam_step_with, OptimizerState};
pub use ckpt::{
    checkpoint_bytes, load_checkpoint, save_checkpoint, write_atomic, CheckpointData, LayerData,
};
pub use error::{NnError, Result};
pub use gaussian::{
    gaussian_entropy, gaussian_logp, gaussian_sample, GaussianPolicy, ValueFn, DEFAULT_HIDDEN,
    LOG_STD_MAX, LOG_STD_MIN,
};
pub use mlp::mlp_forward;
pub use params::{xavier_init, GradientSet, LayerParams, ParameterSet};
pub use rng::SeedStreams;
pub use tape::{net_forward, register_net, LeafGrads, Tape, TapeNet, ValueId};
pub use tensor::Tensor;
