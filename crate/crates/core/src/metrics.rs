//! Field similarity: PSNR, SSIM, MS-SSIM and low/high frequency band distances.

use crate::error::{Error, Result};
use crate::field::RealField;
use crate::radial::RadialMap;
use crate::spectrum::forward_transform;

/// Reported PSNR when the inputs are identical.
pub const PSNR_CAP_DB: f64 = 100.0;

const WINDOW: usize = 11;
const WINDOW_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

/// Scale weights, coarse last. They sum to 1.0001 and are divided by that.
pub const MS_SSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];
/// Smallest side that survives four halvings with a full window left.
pub const MS_SSIM_MIN_SIDE: usize = WINDOW << 4;

pub fn psnr(a: &RealField, b: &RealField, dynamic_range: f64) -> Result<f64> {
    a.shape().ensure_eq(&b.shape())?;
    if dynamic_range.is_nan() || dynamic_range <= 0.0 {
        return Err(Error::InvalidInput(format!("dynamic range {dynamic_range} must be positive")));
    }
    let mse = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.data().len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (dynamic_range * dynamic_range / mse).log10()).min(PSNR_CAP_DB))
}

fn gaussian_window() -> [f64; WINDOW] {
    let mut w = [0.0; WINDOW];
    let half = (WINDOW / 2) as f64;
    for (i, x) in w.iter_mut().enumerate() {
        *x = (-((i as f64 - half).powi(2)) / (2.0 * WINDOW_SIGMA * WINDOW_SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

/// Separable window filter over valid positions only.
fn filter_valid(x: &[f64], h: usize, w: usize, k: &[f64; WINDOW]) -> Vec<f64> {
    let (oh, ow) = (h - WINDOW + 1, w - WINDOW + 1);
    let mut rows = vec![0.0; h * ow];
    for r in 0..h {
        for c in 0..ow {
            rows[r * ow + c] = (0..WINDOW).map(|i| k[i] * x[r * w + c + i]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            out[r * ow + c] = (0..WINDOW).map(|i| k[i] * rows[(r + i) * ow + c]).sum();
        }
    }
    out
}

/// Mean SSIM and mean contrast-structure term for one plane.
fn ssim_plane(a: &[f64], b: &[f64], h: usize, w: usize, range: f64) -> (f64, f64) {
    let k = gaussian_window();
    let c1 = (K1 * range).powi(2);
    let c2 = (K2 * range).powi(2);
    let prod = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| x * y).collect::<Vec<_>>();
    let ma = filter_valid(a, h, w, &k);
    let mb = filter_valid(b, h, w, &k);
    let aa = filter_valid(&prod(a, a), h, w, &k);
    let bb = filter_valid(&prod(b, b), h, w, &k);
    let ab = filter_valid(&prod(a, b), h, w, &k);
    let n = ma.len() as f64;
    let (mut s_sum, mut cs_sum) = (0.0, 0.0);
    for i in 0..ma.len() {
        let (sa, sb, sab) = (aa[i] - ma[i] * ma[i], bb[i] - mb[i] * mb[i], ab[i] - ma[i] * mb[i]);
        let cs = (2.0 * sab + c2) / (sa + sb + c2);
        let l = (2.0 * ma[i] * mb[i] + c1) / (ma[i] * ma[i] + mb[i] * mb[i] + c1);
        s_sum += l * cs;
        cs_sum += cs;
    }
    (s_sum / n, cs_sum / n)
}

fn check_pair(a: &RealField, b: &RealField, dynamic_range: f64, min_side: usize) -> Result<()> {
    a.shape().ensure_eq(&b.shape())?;
    if dynamic_range.is_nan() || dynamic_range <= 0.0 {
        return Err(Error::InvalidInput(format!("dynamic range {dynamic_range} must be positive")));
    }
    let side = a.shape().height.min(a.shape().width);
    if side < min_side {
        return Err(Error::TooSmall { side, required: min_side });
    }
    Ok(())
}

/// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5), averaged over
/// valid window positions and then over channels.
pub fn ssim(a: &RealField, b: &RealField, dynamic_range: f64) -> Result<f64> {
    check_pair(a, b, dynamic_range, WINDOW)?;
    let s = a.shape();
    let total: f64 = (0..s.channels)
        .map(|c| ssim_plane(a.channel(c), b.channel(c), s.height, s.width, dynamic_range).0)
        .sum();
    Ok(total / s.channels as f64)
}

fn pool2(x: &[f64], h: usize, w: usize) -> (Vec<f64>, usize, usize) {
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(oh * ow);
    for r in 0..oh {
        for c in 0..ow {
            let i = 2 * r * w + 2 * c;
            out.push(0.25 * (x[i] + x[i + 1] + x[i + w] + x[i + w + 1]));
        }
    }
    (out, oh, ow)
}

/// Five-scale MS-SSIM. Negative contrast-structure terms are clamped to 0
/// before the fractional powers.
pub fn ms_ssim(a: &RealField, b: &RealField, dynamic_range: f64) -> Result<f64> {
    check_pair(a, b, dynamic_range, MS_SSIM_MIN_SIDE)?;
    let s = a.shape();
    let norm: f64 = MS_SSIM_WEIGHTS.iter().sum();
    let mut per_scale = [0.0; 5];
    for c in 0..s.channels {
        let (mut pa, mut pb, mut h, mut w) = (a.channel(c).to_vec(), b.channel(c).to_vec(), s.height, s.width);
        for (j, slot) in per_scale.iter_mut().enumerate() {
            let (full, cs) = ssim_plane(&pa, &pb, h, w, dynamic_range);
            *slot += if j == 4 { full } else { cs };
            if j < 4 {
                let (na, nh, nw) = pool2(&pa, h, w);
                pb = pool2(&pb, h, w).0;
                pa = na;
                h = nh;
                w = nw;
            }
        }
    }
    Ok(per_scale
        .iter()
        .zip(MS_SSIM_WEIGHTS)
        .map(|(v, wt)| (v / s.channels as f64).max(0.0).powf(wt / norm))
        .product())
}

/// RMS of `|F(a) - F(b)|` over bins with `d < cutoff * d_max` (low) and the
/// rest (high), pooled over channels.
pub fn band_distance(a: &RealField, b: &RealField, cutoff_fraction: f64) -> Result<(f64, f64)> {
    a.shape().ensure_eq(&b.shape())?;
    if !(cutoff_fraction > 0.0 && cutoff_fraction < 1.0) {
        return Err(Error::InvalidInput(format!("cutoff fraction {cutoff_fraction} not in (0, 1)")));
    }
    let shape = a.shape();
    let radial = RadialMap::new(shape.height, shape.width)?;
    let low = radial.low_mask(cutoff_fraction);
    let diff = forward_transform(&a.sub(b)?)?;
    let (mut sl, mut nl, mut sh, mut nh) = (0.0, 0usize, 0.0, 0usize);
    for (i, z) in diff.coeffs().iter().enumerate() {
        if low[i % shape.plane()] {
            sl += z.norm_sqr();
            nl += 1;
        } else {
            sh += z.norm_sqr();
            nh += 1;
        }
    }
    let rms = |s: f64, n: usize| if n == 0 { 0.0 } else { (s / n as f64).sqrt() };
    Ok((rms(sl, nl), rms(sh, nh)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub ssim: f64,
    /// Present only when both sides reach [`MS_SSIM_MIN_SIDE`].
    pub ms_ssim: Option<f64>,
    pub band_low: f64,
    pub band_high: f64,
}

impl MetricReport {
    pub fn compute(a: &RealField, b: &RealField, dynamic_range: f64, cutoff_fraction: f64) -> Result<Self> {
        let (band_low, band_high) = band_distance(a, b, cutoff_fraction)?;
        let ms = match ms_ssim(a, b, dynamic_range) {
            Ok(v) => Some(v),
            Err(Error::TooSmall { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            psnr_db: psnr(a, b, dynamic_range)?,
            ssim: ssim(a, b, dynamic_range)?,
            ms_ssim: ms,
            band_low,
            band_high,
        })
    }
}
