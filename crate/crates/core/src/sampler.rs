//! Deterministic DDIM sampling with per-step latent hooks.

use crate::denoise::WienerDenoiser;
use crate::error::{Error, Result};
use crate::field::RealField;
use crate::prior::{ConditionSpec, PowerLawPrior};
use crate::rng::{gaussian_field, STREAM_INITIAL, STREAM_INITIAL_ALT};
use crate::schedule::NoiseSchedule;

/// Deterministic (eta = 0) DDIM update from `t` to `t_prev`.
pub fn ddim_step(
    z_t: &RealField,
    t: usize,
    t_prev: usize,
    eps_hat: &RealField,
    schedule: &NoiseSchedule,
) -> Result<RealField> {
    if t_prev >= t {
        return Err(Error::InvalidStepOrder { t, t_prev });
    }
    let a = schedule.alpha_bar(t)?;
    let ap = schedule.alpha_bar(t_prev)?;
    let z0 = z_t.lin_comb(1.0 / a.sqrt(), eps_hat, -(1.0 - a).sqrt() / a.sqrt())?;
    z0.lin_comb(ap.sqrt(), eps_hat, (1.0 - ap).sqrt())
}

/// Where a hook is being called.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepContext {
    /// 1-based.
    pub step_index: usize,
    pub timestep: usize,
    pub num_steps: usize,
}

/// Intercepts the latent before each denoiser call.
pub trait LatentHook {
    fn apply(&mut self, ctx: StepContext, z_t: RealField) -> Result<RealField>;
}

impl<F> LatentHook for F
where
    F: FnMut(StepContext, RealField) -> Result<RealField>,
{
    fn apply(&mut self, ctx: StepContext, z_t: RealField) -> Result<RealField> {
        self(ctx, z_t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub step_index: usize,
    pub timestep: usize,
    /// Latent after hooks, as seen by the denoiser.
    pub latent: RealField,
    pub z0_estimate: RealField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub condition: ConditionSpec,
    pub steps: Vec<TrajectoryStep>,
    pub final_latent: RealField,
}

/// Initial latent for a seed. `alternate` draws from an independent stream.
pub fn initial_latent(condition: &ConditionSpec, seed: u64, alternate: bool) -> RealField {
    let stream = if alternate { STREAM_INITIAL_ALT } else { STREAM_INITIAL };
    gaussian_field(condition.shape(), seed, stream)
}

pub fn sample(
    condition: &ConditionSpec,
    prior: &PowerLawPrior,
    schedule: &NoiseSchedule,
    num_steps: usize,
    seed: u64,
    hooks: &mut [&mut dyn LatentHook],
) -> Result<TrajectoryRecord> {
    let z_init = initial_latent(condition, seed, false);
    sample_from(condition, prior, schedule, num_steps, seed, z_init, hooks)
}

/// [`sample`] starting from an explicit `z_T`.
pub fn sample_from(
    condition: &ConditionSpec,
    prior: &PowerLawPrior,
    schedule: &NoiseSchedule,
    num_steps: usize,
    seed: u64,
    z_init: RealField,
    hooks: &mut [&mut dyn LatentHook],
) -> Result<TrajectoryRecord> {
    let shape = condition.shape();
    shape.ensure_eq(&z_init.shape())?;
    let denoiser = WienerDenoiser::new(prior, condition, schedule)?;
    let timesteps = schedule.timesteps(num_steps)?;
    let mut steps = Vec::with_capacity(num_steps);
    let mut z = z_init;
    for (i, &t) in timesteps.iter().enumerate() {
        let ctx = StepContext { step_index: i + 1, timestep: t, num_steps };
        for hook in hooks.iter_mut() {
            z = hook.apply(ctx, z)?;
            if z.shape() != shape {
                return Err(Error::HookContract {
                    step: ctx.step_index,
                    expected: shape.to_string(),
                    got: z.shape().to_string(),
                });
            }
        }
        let (z0, eps) = denoiser.denoise(&z, t)?;
        let t_prev = timesteps.get(i + 1).copied().unwrap_or(0);
        let next = ddim_step(&z, t, t_prev, &eps, schedule)?;
        steps.push(TrajectoryStep { step_index: i + 1, timestep: t, latent: z, z0_estimate: z0 });
        z = next;
    }
    Ok(TrajectoryRecord { seed, condition: condition.clone(), steps, final_latent: z })
}
