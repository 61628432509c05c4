//! Dynamics parameters, randomization domains, and uniform sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::EnvId;
use crate::error::{EnvError, Result};

/// Multiplicative scalings applied to an environment's physical constants:
/// one mass scale and one friction (damping/drag) scale per friction-bearing
/// component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub mass_scale: f64,
    pub friction_scales: Vec<f64>,
}

impl DynamicsParams {
    /// The unscaled system: every coefficient 1.
    pub fn nominal(env_id: EnvId) -> Self {
        DynamicsParams {
            mass_scale: 1.0,
            friction_scales: vec![1.0; env_id.friction_components()],
        }
    }

    /// One scalar mass coefficient and one scalar friction coefficient
    /// applied to every friction component (the validation-grid convention).
    pub fn scalar(env_id: EnvId, mass_scale: f64, friction_scale: f64) -> Self {
        DynamicsParams {
            mass_scale,
            friction_scales: vec![friction_scale; env_id.friction_components()],
        }
    }

    pub fn validate(&self, env_id: EnvId) -> Result<()> {
        if !(self.mass_scale.is_finite() && self.mass_scale > 0.0) {
            return Err(EnvError::Config(format!(
                "mass_scale must be a positive finite number, got {}",
                self.mass_scale
            )));
        }
        if self.friction_scales.len() != env_id.friction_components() {
            return Err(EnvError::Config(format!(
                "{} needs {} friction scales, got {}",
                env_id,
                env_id.friction_components(),
                self.friction_scales.len()
            )));
        }
        for (i, &f) in self.friction_scales.iter().enumerate() {
            if !(f.is_finite() && f > 0.0) {
                return Err(EnvError::Config(format!(
                    "friction_scales[{i}] must be a positive finite number, got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// A closed interval with positive bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let iv = Interval { lo, hi };
        iv.validate()?;
        Ok(iv)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(EnvError::Config(format!(
                "interval bounds must be finite, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.lo > self.hi {
            return Err(EnvError::Config(format!(
                "interval lower bound {} exceeds upper bound {}",
                self.lo, self.hi
            )));
        }
        if self.lo <= 0.0 {
            return Err(EnvError::Config(format!(
                "interval lower bound must be positive, got {}",
                self.lo
            )));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo..=self.hi)
        }
    }
}

/// The set of training environments for domain randomization: one closed
/// interval per [`DynamicsParams`] entry, sampled uniformly and
/// independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub mass: Interval,
    pub friction: Vec<Interval>,
}

impl DomainSpec {
    /// The common case: one mass interval plus the same friction interval
    /// replicated for each of the environment's friction components.
    pub fn uniform(env_id: EnvId, mass: (f64, f64), friction: (f64, f64)) -> Result<Self> {
        let spec = DomainSpec {
            mass: Interval::new(mass.0, mass.1)?,
            friction: vec![Interval::new(friction.0, friction.1)?; env_id.friction_components()],
        };
        Ok(spec)
    }

    pub fn validate(&self, env_id: EnvId) -> Result<()> {
        self.mass.validate()?;
        if self.friction.len() != env_id.friction_components() {
            return Err(EnvError::Config(format!(
                "{} needs {} friction intervals, got {}",
                env_id,
                env_id.friction_components(),
                self.friction.len()
            )));
        }
        for iv in &self.friction {
            iv.validate()?;
        }
        Ok(())
    }
}

/// Draw one dynamics parameterization uniformly from the domain: mass first,
/// then each friction component, all independent. Call once per rollout —
/// the draw stays fixed for the whole episode.
pub fn dr_sample(spec: &DomainSpec, rng: &mut impl Rng) -> DynamicsParams {
    DynamicsParams {
        mass_scale: spec.mass.sample(rng),
        friction_scales: spec.friction.iter().map(|iv| iv.sample(rng)).collect(),
    }
}
