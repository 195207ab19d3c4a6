//! Staged high-pass filtering of the noisy latent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RealField;
use crate::radial::RadialMap;
use crate::sampler::{LatentHook, StepContext};
use crate::spectrum::{forward_transform, inverse_transform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterShape {
    Hard,
    GaussianEdge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    /// Cutoff radius as a fraction of `d_max`.
    pub cutoff_fraction: f64,
    pub shape: FilterShape,
    /// Inclusive 1-based step range.
    pub active_steps: (usize, usize),
}

impl FilterSpec {
    pub fn new(cutoff_fraction: f64, shape: FilterShape, active_steps: (usize, usize)) -> Result<Self> {
        if !(cutoff_fraction > 0.0 && cutoff_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!("cutoff fraction {cutoff_fraction} not in (0, 1)")));
        }
        if active_steps.0 < 1 || active_steps.0 > active_steps.1 {
            return Err(Error::InvalidConfig(format!("bad step range {active_steps:?}")));
        }
        Ok(Self { cutoff_fraction, shape, active_steps })
    }

    pub fn check_steps(&self, num_steps: usize) -> Result<()> {
        if self.active_steps.1 > num_steps {
            return Err(Error::InvalidConfig(format!(
                "step range {:?} exceeds {num_steps} steps",
                self.active_steps
            )));
        }
        Ok(())
    }

    pub fn is_active(&self, step_index: usize) -> bool {
        (self.active_steps.0..=self.active_steps.1).contains(&step_index)
    }

    fn gains(&self, radial: &RadialMap) -> Vec<f64> {
        let cut = self.cutoff_fraction * radial.d_max();
        radial
            .distances()
            .iter()
            .map(|&d| match self.shape {
                FilterShape::Hard => {
                    if d < cut {
                        0.0
                    } else {
                        1.0
                    }
                }
                FilterShape::GaussianEdge => 1.0 - (-(d * d) / (2.0 * cut * cut)).exp(),
            })
            .collect()
    }
}

/// Removes low-frequency content of every channel. Ignores `active_steps`.
pub fn high_pass_intervention(z_t: &RealField, spec: &FilterSpec) -> Result<RealField> {
    let shape = z_t.shape();
    let radial = RadialMap::new(shape.height, shape.width)?;
    inverse_transform(&forward_transform(z_t)?.scale_bins(&spec.gains(&radial))?)
}

/// Applies [`high_pass_intervention`] on the steps inside the filter's step range.
#[derive(Debug, Clone)]
pub struct HighPassHook {
    pub spec: FilterSpec,
}

impl LatentHook for HighPassHook {
    fn apply(&mut self, ctx: StepContext, z_t: RealField) -> Result<RealField> {
        self.spec.check_steps(ctx.num_steps)?;
        if self.spec.is_active(ctx.step_index) {
            high_pass_intervention(&z_t, &self.spec)
        } else {
            Ok(z_t)
        }
    }
}
