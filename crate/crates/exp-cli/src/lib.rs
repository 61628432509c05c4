//! `rap-lab`: configuration, orchestration, and reporting for robustness
//! experiments.
//!
//! The library side holds everything the binary does — config parsing and
//! canonicalization, per-seed training plus evaluation into a run directory,
//! manifest verification, and SVG heatmap rendering — so integration tests
//! can drive full experiments in-process.

pub mod config;
pub mod error;
pub mod experiment;
pub mod manifest;
pub mod svg;

pub use config::{
    canonical_toml, config_hash, load_config, parse_config, DomainRanges, ExperimentConfig,
};
pub use error::{CliError, Result};
pub use experiment::{
    eval_checkpoint, expected_artifacts, read_grid_means, report, run_experiment, run_sweep,
    swap_runs,
};
pub use manifest::{
    read_manifest, verify_run_dir, write_manifest, RunManifest, CONFIG_FILE, MANIFEST_FILE,
};
pub use svg::{emit_heatmap_svg, heatmap_svg};
