//! Centered 2D discrete Fourier transforms.
//!
//! Convention: the forward transform is unnormalized,
//! `F[k, l] = sum_{m, n} z[m, n] exp(-2 pi i (k m / H + l n / W))`, and the
//! inverse carries the full `1 / (H W)` factor. Coefficients are stored
//! center-shifted: zero frequency sits at `(H / 2, W / 2)` (integer division),
//! so centered row `u` holds raw frequency `(u + H - H / 2) mod H`. Every
//! channel is transformed independently.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{RealField, Shape};

/// Relative imaginary residual tolerated by [`inverse_transform`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// Per-channel bin limit for [`brute_force_dft`].
pub const ORACLE_MAX_BINS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    shape: Shape,
    coeffs: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn new(shape: Shape, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != shape.len() {
            return Err(Error::InvalidInput(format!(
                "{} coefficients supplied for shape {shape}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite spectral coefficient".into()));
        }
        Ok(Self { shape, coeffs })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at centered bin `(u, v)` of channel `c`.
    pub fn get(&self, c: usize, u: usize, v: usize) -> Complex64 {
        self.coeffs[(c * self.shape.height + u) * self.shape.width + v]
    }

    /// Centered index of the bin holding the conjugate frequency of `(u, v)`.
    pub fn mirror(&self, u: usize, v: usize) -> (usize, usize) {
        mirror_index(self.shape.height, self.shape.width, u, v)
    }

    /// Multiplies every channel by a real per-bin gain of length `H * W`.
    pub fn scale_bins(&self, gains: &[f64]) -> Result<ComplexSpectrum> {
        let plane = self.shape.plane();
        if gains.len() != plane {
            return Err(Error::InvalidInput(format!(
                "{} gains for {plane} bins per channel",
                gains.len()
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, z)| z * gains[i % plane])
            .collect();
        ComplexSpectrum::new(self.shape, coeffs)
    }

    pub fn sub(&self, other: &ComplexSpectrum) -> Result<ComplexSpectrum> {
        self.shape.ensure_eq(&other.shape)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        ComplexSpectrum::new(self.shape, coeffs)
    }

    /// Largest relative deviation from `F[k] = conj(F[-k])`, scaled by the
    /// largest magnitude in the spectrum.
    pub fn hermitian_error(&self) -> f64 {
        let (h, w) = (self.shape.height, self.shape.width);
        let scale = self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for c in 0..self.shape.channels {
            for u in 0..h {
                for v in 0..w {
                    let (mu, mv) = mirror_index(h, w, u, v);
                    let d = (self.get(c, u, v) - self.get(c, mu, mv).conj()).norm();
                    worst = worst.max(d);
                }
            }
        }
        worst / scale
    }

    pub fn max_abs_diff(&self, other: &ComplexSpectrum) -> Result<f64> {
        self.shape.ensure_eq(&other.shape)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Sum of squared magnitudes per channel.
    pub fn channel_energy(&self) -> Vec<f64> {
        self.coeffs
            .chunks(self.shape.plane())
            .map(|ch| ch.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }
}

pub fn mirror_index(height: usize, width: usize, u: usize, v: usize) -> (usize, usize) {
    let (cu, cv) = (height / 2, width / 2);
    ((2 * cu + height - u) % height, (2 * cv + width - v) % width)
}

/// Plans keyed by (length, inverse).
type PlanCache = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(HashMap::new());
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    let key = (len, direction == FftDirection::Forward);
    PLANS.with(|plans| {
        plans
            .borrow_mut()
            .entry(key)
            .or_insert_with(|| PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction)))
            .clone()
    })
}

fn transpose(src: &[Complex64], rows: usize, cols: usize, dst: &mut [Complex64]) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// In-place raw (unshifted) 2D FFT of one `h x w` plane.
fn fft2_plane(plane: &mut [Complex64], h: usize, w: usize, direction: FftDirection) {
    plan(w, direction).process(plane);
    let mut t = vec![Complex64::new(0.0, 0.0); h * w];
    transpose(plane, h, w, &mut t);
    plan(h, direction).process(&mut t);
    transpose(&t, w, h, plane);
}

fn shift(raw: &[Complex64], h: usize, w: usize) -> Vec<Complex64> {
    let (cu, cv) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(h * w);
    for u in 0..h {
        let ru = (u + h - cu) % h;
        for v in 0..w {
            out.push(raw[ru * w + (v + w - cv) % w]);
        }
    }
    out
}

/// Averages each bin with the conjugate of its mirror. The result is exactly
/// Hermitian in floating point, so real-valued gains keep it that way and the
/// inverse check never trips on rounding noise of nearly empty spectra.
fn hermitian_projection(centered: &[Complex64], h: usize, w: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(h * w);
    for u in 0..h {
        for v in 0..w {
            let (mu, mv) = mirror_index(h, w, u, v);
            out.push((centered[u * w + v] + centered[mu * w + mv].conj()) * 0.5);
        }
    }
    out
}

fn unshift(centered: &[Complex64], h: usize, w: usize) -> Vec<Complex64> {
    let (cu, cv) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(h * w);
    for k in 0..h {
        let u = (k + cu) % h;
        for l in 0..w {
            out.push(centered[u * w + (l + cv) % w]);
        }
    }
    out
}

pub fn forward_transform(field: &RealField) -> Result<ComplexSpectrum> {
    let shape = field.shape();
    let (h, w) = (shape.height, shape.width);
    let mut coeffs = Vec::with_capacity(shape.len());
    for c in 0..shape.channels {
        let mut plane: Vec<Complex64> =
            field.channel(c).iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fft2_plane(&mut plane, h, w, FftDirection::Forward);
        coeffs.extend(hermitian_projection(&shift(&plane, h, w), h, w));
    }
    ComplexSpectrum::new(shape, coeffs)
}

/// Exact inverse of [`forward_transform`]. The imaginary residual is checked
/// against [`SYMMETRY_TOLERANCE`] and then dropped.
pub fn inverse_transform(spectrum: &ComplexSpectrum) -> Result<RealField> {
    let shape = spectrum.shape();
    let (h, w) = (shape.height, shape.width);
    let n = (h * w) as f64;
    let mut values = Vec::with_capacity(shape.len());
    let mut max_im: f64 = 0.0;
    let mut max_re: f64 = 0.0;
    for ch in spectrum.coeffs().chunks(shape.plane()) {
        let mut plane = unshift(ch, h, w);
        fft2_plane(&mut plane, h, w, FftDirection::Inverse);
        for z in &plane {
            let z = z / n;
            max_im = max_im.max(z.im.abs());
            max_re = max_re.max(z.re.abs());
            values.push(z.re);
        }
    }
    if max_im > SYMMETRY_TOLERANCE * max_re {
        return Err(Error::SymmetryViolation { residual: max_im, scale: max_re });
    }
    RealField::new(shape, values)
}

/// Direct double-sum DFT with the same convention and layout as
/// [`forward_transform`]. Quadratic cost, so limited to [`ORACLE_MAX_BINS`].
pub fn brute_force_dft(field: &RealField) -> Result<ComplexSpectrum> {
    let shape = field.shape();
    let (h, w) = (shape.height, shape.width);
    if h * w > ORACLE_MAX_BINS {
        return Err(Error::OracleSize { bins: h * w, limit: ORACLE_MAX_BINS });
    }
    let (cu, cv) = (h / 2, w / 2);
    let tau = std::f64::consts::TAU;
    let mut coeffs = Vec::with_capacity(shape.len());
    for c in 0..shape.channels {
        let z = field.channel(c);
        for u in 0..h {
            let k = (u + h - cu) % h;
            for v in 0..w {
                let l = (v + w - cv) % w;
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..h {
                    for n in 0..w {
                        // reduce the phase index first to keep the angle small
                        let ph = ((k * m) % h) as f64 / h as f64 + ((l * n) % w) as f64 / w as f64;
                        acc += Complex64::from_polar(z[m * w + n], -tau * ph);
                    }
                }
                coeffs.push(acc);
            }
        }
    }
    ComplexSpectrum::new(shape, coeffs)
}
