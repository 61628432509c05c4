//! Run manifests: a machine-readable receipt for every run directory.
//!
//! The manifest records the config hash, seeds, checkpoint paths, artifact
//! paths, and timings. Verification re-canonicalizes the persisted
//! `config.toml` and recomputes its hash, so any tampering with the stored
//! config — or a manifest copied from another run — is detected.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::{config_hash, load_config};
use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// SHA-256 of the canonicalized config.
    pub config_hash: String,
    pub master_seed: u64,
    pub tool_version: String,
    pub started_at_unix: u64,
    pub finished_at_unix: u64,
    /// Seeds the run attempted, in order.
    pub seeds: Vec<u64>,
    /// Checkpoint paths per seed (relative to the run directory): exactly
    /// one per policy — the agent plus each adversary.
    pub checkpoints: BTreeMap<String, Vec<String>>,
    /// Data artifacts (CSV/SVG) relative to the run directory.
    pub artifacts: Vec<String>,
    /// Seeds that failed, with the reason; empty on full success.
    pub failures: BTreeMap<String, String>,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .unwrap_or_default()
        .as_secs()
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(dir.join(MANIFEST_FILE), text + "\n")?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| {
        CliError::Verify(format!("cannot read {}: {e}", path.display()))
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Check a run directory end to end: the stored config re-hashes to the
/// manifest's `config_hash`, and every listed artifact and checkpoint
/// exists. Returns the verified manifest.
pub fn verify_run_dir(dir: &Path) -> Result<RunManifest> {
    let manifest = read_manifest(dir)?;
    let cfg = load_config(&dir.join(CONFIG_FILE))?;
    let recomputed = config_hash(&cfg)?;
    if recomputed != manifest.config_hash {
        return Err(CliError::Verify(format!(
            "config hash mismatch in {}: manifest says {}, stored config hashes to {recomputed}",
            dir.display(),
            manifest.config_hash
        )));
    }
    let mut missing = Vec::new();
    for rel in manifest
        .artifacts
        .iter()
        .chain(manifest.checkpoints.values().flatten())
    {
        if !dir.join(rel).exists() {
            missing.push(rel.clone());
        }
    }
    if !missing.is_empty() {
        return Err(CliError::Verify(format!(
            "missing artifacts in {}: {}",
            dir.display(),
            missing.join(", ")
        )));
    }
    Ok(manifest)
}
