//! Frequency-dependent signal-to-noise ratio, closed form and Monte Carlo.

use crate::error::{Error, Result};
use crate::field::Shape;
use crate::prior::{prior_deviation, ConditionSpec, PowerLawPrior};
use crate::psd::{annulus_index, PsdAccumulator, PsdProfile};
use crate::radial::RadialMap;
use crate::rng::{gaussian_field, STREAM_NOISE};
use crate::schedule::NoiseSchedule;
use crate::spectrum::forward_transform;

/// `(alpha_bar_t / (1 - alpha_bar_t)) * v(d) / noise_power`.
pub fn theoretical_snr(
    d: f64,
    t: usize,
    prior: &PowerLawPrior,
    schedule: &NoiseSchedule,
    noise_power: f64,
) -> Result<f64> {
    if t == 0 || t > schedule.horizon() {
        return Err(Error::InvalidTimestep { t, min: 1, max: schedule.horizon() });
    }
    let a = schedule.alpha_bar(t)?;
    Ok(a / (1.0 - a) * prior.variance(d) / noise_power)
}

/// Theoretical SNR averaged over the grid bins of each annulus, using the
/// same per-bin variances (zero frequency included) as the sampler.
pub fn theoretical_snr_profile(
    shape: Shape,
    num_bins: usize,
    t: usize,
    prior: &PowerLawPrior,
    schedule: &NoiseSchedule,
) -> Result<Vec<Option<f64>>> {
    let radial = RadialMap::new(shape.height, shape.width)?;
    if t == 0 || t > schedule.horizon() {
        return Err(Error::InvalidTimestep { t, min: 1, max: schedule.horizon() });
    }
    let a = schedule.alpha_bar(t)?;
    let factor = a / (1.0 - a) / shape.plane() as f64;
    let mut sums = vec![0.0; num_bins];
    let mut counts = vec![0usize; num_bins];
    for (v, i) in prior.variance_map(&radial).iter().zip(annulus_index(&radial, num_bins)) {
        sums[i] += factor * v;
        counts[i] += 1;
    }
    Ok(sums.iter().zip(&counts).map(|(&s, &c)| (c > 0).then(|| s / c as f64)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSnr {
    /// Mean of `alpha_bar_t |F(z0 - mu)|^2` per annulus.
    pub signal: PsdProfile,
    /// Mean of `(1 - alpha_bar_t) |F(eps)|^2` per annulus.
    pub noise: PsdProfile,
    pub ratio: Vec<Option<f64>>,
}

pub fn empirical_snr(
    prior: &PowerLawPrior,
    condition: &ConditionSpec,
    schedule: &NoiseSchedule,
    t: usize,
    num_samples: usize,
    num_bins: usize,
    seed: u64,
) -> Result<EmpiricalSnr> {
    if num_samples < 2 {
        return Err(Error::InvalidInput("num_samples must be at least 2".into()));
    }
    let a = schedule.alpha_bar(t)?;
    let shape = condition.shape();
    let mut sig = PsdAccumulator::new(shape.height, shape.width, num_bins)?;
    let mut noi = PsdAccumulator::new(shape.height, shape.width, num_bins)?;
    for i in 0..num_samples as u64 {
        let sample_seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i);
        let dev = prior_deviation(prior, shape, sample_seed)?;
        let eps = gaussian_field(shape, sample_seed, STREAM_NOISE);
        sig.add(&forward_transform(&dev.scale(a.sqrt())?)?)?;
        noi.add(&forward_transform(&eps.scale((1.0 - a).sqrt())?)?)?;
    }
    let signal = sig.finish();
    let noise = noi.finish();
    let ratio = signal
        .mean_power
        .iter()
        .zip(&noise.mean_power)
        .map(|(s, n)| match (s, n) {
            (Some(s), Some(n)) if *n > 0.0 => Some(s / n),
            _ => None,
        })
        .collect();
    Ok(EmpiricalSnr { signal, noise, ratio })
}
