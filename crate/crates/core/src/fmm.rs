//! Frequency modulation: radially decaying, time-decaying fusion of the
//! original trajectory's spectrum into the refined trajectory.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RealField;
use crate::prior::{ConditionSpec, PowerLawPrior};
use crate::radial::RadialMap;
use crate::sampler::{initial_latent, sample_from, LatentHook, StepContext, TrajectoryRecord};
use crate::schedule::NoiseSchedule;
use crate::spectrum::{forward_transform, inverse_transform, ComplexSpectrum};

/// `exp((t - T) / T)`: 1 at the start of sampling, `1/e` at the end.
pub fn decay_factor(t: usize, horizon: usize) -> Result<f64> {
    if horizon == 0 || t > horizon {
        return Err(Error::InvalidTimestep { t, min: 0, max: horizon });
    }
    Ok(((t as f64 - horizon as f64) / horizon as f64).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Gaussian,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub alpha: f64,
    pub sigma: f64,
    pub kind: WeightKind,
    pub horizon: usize,
    /// Multiply by [`decay_factor`]. Off only for limit experiments.
    pub decay: bool,
}

impl WeightParams {
    pub fn new(alpha: f64, sigma: f64, kind: WeightKind, horizon: usize) -> Result<Self> {
        Self { alpha, sigma, kind, horizon, decay: true }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) || !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "alpha {} and sigma {} must be positive and finite",
                self.alpha, self.sigma
            )));
        }
        if self.horizon < 1 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        Ok(self)
    }

    /// Weight at radius `d` on a grid whose largest radius is `d_max`.
    pub fn weight(&self, d: f64, d_max: f64, t: usize) -> Result<f64> {
        let decay = decay_factor(t, self.horizon)?;
        let x = d / (d_max * self.alpha);
        let shape = match self.kind {
            WeightKind::Gaussian => (-(x * x) / (2.0 * self.sigma * self.sigma)).exp(),
            WeightKind::Linear => (1.0 - x).max(0.0),
        };
        Ok(if self.decay { decay * shape } else { shape })
    }
}

/// Weights for every bin of one grid at one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    pub timestep: usize,
    pub weights: Vec<f64>,
}

pub fn weight_field(radial: &RadialMap, t: usize, params: &WeightParams) -> Result<WeightField> {
    decay_factor(t, params.horizon)?;
    let weights = radial
        .distances()
        .iter()
        .map(|&d| params.weight(d, radial.d_max(), t))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightField { timestep: t, weights })
}

/// `w F_ori + (1 - w) F_ref` per bin, the same weights on every channel.
pub fn fuse_spectra(spec_ori: &ComplexSpectrum, spec_ref: &ComplexSpectrum, weights: &WeightField) -> Result<ComplexSpectrum> {
    let shape = spec_ori.shape();
    shape.ensure_eq(&spec_ref.shape())?;
    let plane = shape.plane();
    if weights.weights.len() != plane {
        return Err(Error::InvalidInput(format!(
            "{} weights for {plane} bins per channel",
            weights.weights.len()
        )));
    }
    let coeffs: Vec<Complex64> = spec_ori
        .coeffs()
        .iter()
        .zip(spec_ref.coeffs())
        .enumerate()
        .map(|(i, (&a, &b))| {
            let w = weights.weights[i % plane];
            if w == 1.0 {
                a
            } else if w == 0.0 {
                b
            } else {
                a * w + b * (1.0 - w)
            }
        })
        .collect();
    ComplexSpectrum::new(shape, coeffs)
}

/// Fuses the original latent's spectrum into the refined latent at timestep `t`.
pub fn modulate(z_ori_t: &RealField, z_ref_t: &RealField, t: usize, params: &WeightParams) -> Result<RealField> {
    let shape = z_ori_t.shape();
    let radial = RadialMap::new(shape.height, shape.width)?;
    modulate_on(&radial, z_ori_t, z_ref_t, t, params)
}

fn modulate_on(radial: &RadialMap, z_ori_t: &RealField, z_ref_t: &RealField, t: usize, params: &WeightParams) -> Result<RealField> {
    z_ori_t.shape().ensure_eq(&z_ref_t.shape())?;
    let weights = weight_field(radial, t, params)?;
    let fused = fuse_spectra(&forward_transform(z_ori_t)?, &forward_transform(z_ref_t)?, &weights)?;
    inverse_transform(&fused)
}

/// Replays a recorded original trajectory into the refined one, step by step.
pub struct ModulationHook<'a> {
    original: &'a TrajectoryRecord,
    params: WeightParams,
    radial: RadialMap,
}

impl<'a> ModulationHook<'a> {
    pub fn new(original: &'a TrajectoryRecord, params: WeightParams) -> Result<Self> {
        let shape = original.final_latent.shape();
        Ok(Self { original, params, radial: RadialMap::new(shape.height, shape.width)? })
    }
}

impl LatentHook for ModulationHook<'_> {
    fn apply(&mut self, ctx: StepContext, z_t: RealField) -> Result<RealField> {
        let ori = self
            .original
            .steps
            .get(ctx.step_index - 1)
            .filter(|s| s.timestep == ctx.timestep && self.original.steps.len() == ctx.num_steps)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "refined step {} (t = {}) has no matching original step",
                    ctx.step_index, ctx.timestep
                ))
            })?;
        modulate_on(&self.radial, &ori.latent, &z_t, ctx.timestep, &self.params)
    }
}

/// Runs the original condition unmodified, then the refined condition with
/// modulation toward the original applied before every denoiser call.
#[allow(clippy::too_many_arguments)]
pub fn paired_sample(
    cond_ori: &ConditionSpec,
    cond_ref: &ConditionSpec,
    prior: &PowerLawPrior,
    schedule: &NoiseSchedule,
    num_steps: usize,
    seed: u64,
    params: &WeightParams,
    share_initial_noise: bool,
) -> Result<(TrajectoryRecord, TrajectoryRecord)> {
    let z_ori = initial_latent(cond_ori, seed, false);
    let z_ref = if share_initial_noise { z_ori.clone() } else { initial_latent(cond_ref, seed, true) };
    let original = sample_from(cond_ori, prior, schedule, num_steps, seed, z_ori, &mut [])?;
    let mut hook = ModulationHook::new(&original, *params)?;
    let refined = sample_from(cond_ref, prior, schedule, num_steps, seed, z_ref, &mut [&mut hook])?;
    Ok((original, refined))
}
