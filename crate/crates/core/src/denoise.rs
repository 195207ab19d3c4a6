//! Exact posterior-mean denoiser for the Gaussian toy prior.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::RealField;
use crate::prior::{ConditionSpec, PowerLawPrior};
use crate::radial::RadialMap;
use crate::schedule::NoiseSchedule;
use crate::spectrum::{forward_transform, inverse_transform, ComplexSpectrum};

/// Per-bin gain applied to the innovation `z_t - sqrt(a) mu`:
/// `sqrt(a) v / (a v + (1 - a) n)`.
pub fn wiener_gain(variance: f64, alpha_bar: f64, noise_variance: f64) -> f64 {
    alpha_bar.sqrt() * variance / (alpha_bar * variance + (1.0 - alpha_bar) * noise_variance)
}

/// Wiener denoiser bound to one condition and grid. Holds the prior variance
/// map and the mean spectrum so repeated calls only pay for transforms.
#[derive(Debug, Clone)]
pub struct WienerDenoiser {
    variances: Vec<f64>,
    mean: RealField,
    mean_spectrum: ComplexSpectrum,
    schedule: NoiseSchedule,
}

impl WienerDenoiser {
    pub fn new(prior: &PowerLawPrior, condition: &ConditionSpec, schedule: &NoiseSchedule) -> Result<Self> {
        let shape = condition.shape();
        let radial = RadialMap::new(shape.height, shape.width)?;
        Ok(Self {
            variances: prior.variance_map(&radial),
            mean: condition.mean_field().clone(),
            mean_spectrum: forward_transform(condition.mean_field())?,
            schedule: schedule.clone(),
        })
    }

    pub fn schedule(&self) -> &NoiseSchedule {
        &self.schedule
    }

    /// Returns `(z0_hat, eps_hat)`.
    pub fn denoise(&self, z_t: &RealField, t: usize) -> Result<(RealField, RealField)> {
        let horizon = self.schedule.horizon();
        if t == 0 || t > horizon {
            return Err(Error::InvalidTimestep { t, min: 1, max: horizon });
        }
        self.mean.shape().ensure_eq(&z_t.shape())?;
        let a = self.schedule.alpha_bar(t)?;
        let sa = a.sqrt();
        let n = z_t.shape().plane() as f64;
        let plane = z_t.shape().plane();
        let zs = forward_transform(z_t)?;
        let coeffs: Vec<Complex64> = zs
            .coeffs()
            .iter()
            .zip(self.mean_spectrum.coeffs())
            .enumerate()
            .map(|(i, (z, m))| m + (z - m * sa) * wiener_gain(self.variances[i % plane], a, n))
            .collect();
        let z0 = inverse_transform(&ComplexSpectrum::new(z_t.shape(), coeffs)?)?;
        let eps = z_t.lin_comb(1.0 / (1.0 - a).sqrt(), &z0, -sa / (1.0 - a).sqrt())?;
        Ok((z0, eps))
    }
}

/// One-shot form of [`WienerDenoiser::denoise`].
pub fn wiener_denoise(
    z_t: &RealField,
    t: usize,
    condition: &ConditionSpec,
    prior: &PowerLawPrior,
    schedule: &NoiseSchedule,
) -> Result<(RealField, RealField)> {
    WienerDenoiser::new(prior, condition, schedule)?.denoise(z_t, t)
}

/// Same estimator on a 1D signal of length N, via a direct DFT. `variances`
/// are indexed by raw frequency `k = 0..N` and must satisfy `v[k] = v[N - k]`.
pub fn wiener_denoise_1d(z_t: &[f64], mean: &[f64], variances: &[f64], alpha_bar: f64) -> Result<Vec<f64>> {
    let n = z_t.len();
    if mean.len() != n || variances.len() != n || n == 0 {
        return Err(Error::InvalidInput("1D denoiser inputs must share a nonzero length".into()));
    }
    let dft = |x: &[f64]| -> Vec<Complex64> {
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|m| Complex64::from_polar(x[m], -std::f64::consts::TAU * ((k * m) % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    };
    let (zs, ms) = (dft(z_t), dft(mean));
    let sa = alpha_bar.sqrt();
    let x0: Vec<Complex64> = (0..n)
        .map(|k| ms[k] + (zs[k] - ms[k] * sa) * wiener_gain(variances[k], alpha_bar, n as f64))
        .collect();
    Ok((0..n)
        .map(|m| {
            let s: Complex64 = (0..n)
                .map(|k| x0[k] * Complex64::from_polar(1.0, std::f64::consts::TAU * ((k * m) % n) as f64 / n as f64))
                .sum();
            s.re / n as f64
        })
        .collect())
}
