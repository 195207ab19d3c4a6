//! Radially averaged power spectra and power-law slope fits.

use crate::error::{Error, Result};
use crate::radial::RadialMap;
use crate::spectrum::ComplexSpectrum;

/// Mean spectral power in equal-width radial annuli spanning `[0, d_max]`.
/// Annulus 0 contains the zero-frequency bin.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdProfile {
    pub bin_centers: Vec<f64>,
    /// `None` marks an annulus with no grid bins.
    pub mean_power: Vec<Option<f64>>,
    pub sample_count: Vec<usize>,
    pub d_max: f64,
}

impl PsdProfile {
    pub fn num_bins(&self) -> usize {
        self.bin_centers.len()
    }

    /// Builds a profile on `num_bins` annuli out to `d_max` from explicit powers.
    pub fn from_powers(d_max: f64, powers: Vec<Option<f64>>) -> Result<Self> {
        if powers.len() < 2 || d_max.is_nan() || d_max <= 0.0 {
            return Err(Error::InvalidInput("need at least 2 bins and positive d_max".into()));
        }
        if powers.iter().flatten().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidInput("powers must be finite and nonnegative".into()));
        }
        let width = d_max / powers.len() as f64;
        Ok(Self {
            bin_centers: (0..powers.len()).map(|i| (i as f64 + 0.5) * width).collect(),
            sample_count: powers.iter().map(|p| usize::from(p.is_some())).collect(),
            mean_power: powers,
            d_max,
        })
    }
}

/// Annulus index of every grid bin.
pub fn annulus_index(radial: &RadialMap, num_bins: usize) -> Vec<usize> {
    let width = radial.d_max() / num_bins as f64;
    radial
        .distances()
        .iter()
        .map(|&d| ((d / width) as usize).min(num_bins - 1))
        .collect()
}

/// Running mean of radial profiles over many spectra of one grid size.
#[derive(Debug, Clone)]
pub struct PsdAccumulator {
    radial: RadialMap,
    index: Vec<usize>,
    sums: Vec<f64>,
    counts: Vec<usize>,
    planes: usize,
}

impl PsdAccumulator {
    pub fn new(height: usize, width: usize, num_bins: usize) -> Result<Self> {
        if num_bins < 2 {
            return Err(Error::InvalidInput("num_bins must be at least 2".into()));
        }
        let radial = RadialMap::new(height, width)?;
        let index = annulus_index(&radial, num_bins);
        let mut counts = vec![0; num_bins];
        for &i in &index {
            counts[i] += 1;
        }
        Ok(Self { radial, index, sums: vec![0.0; num_bins], counts, planes: 0 })
    }

    pub fn add(&mut self, spectrum: &ComplexSpectrum) -> Result<()> {
        let shape = spectrum.shape();
        if shape.height != self.radial.height() || shape.width != self.radial.width() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", self.radial.height(), self.radial.width()),
                got: format!("{}x{}", shape.height, shape.width),
            });
        }
        for plane in spectrum.coeffs().chunks(shape.plane()) {
            for (z, &i) in plane.iter().zip(&self.index) {
                self.sums[i] += z.norm_sqr();
            }
            self.planes += 1;
        }
        Ok(())
    }

    pub fn finish(&self) -> PsdProfile {
        let n = self.sums.len();
        let width = self.radial.d_max() / n as f64;
        PsdProfile {
            bin_centers: (0..n).map(|i| (i as f64 + 0.5) * width).collect(),
            mean_power: self
                .sums
                .iter()
                .zip(&self.counts)
                .map(|(&s, &c)| (c > 0 && self.planes > 0).then(|| s / (c * self.planes) as f64))
                .collect(),
            sample_count: self.counts.clone(),
            d_max: self.radial.d_max(),
        }
    }
}

/// Squared magnitudes averaged within each annulus and over channels.
pub fn radially_averaged_psd(spectrum: &ComplexSpectrum, num_bins: usize) -> Result<PsdProfile> {
    let shape = spectrum.shape();
    let mut acc = PsdAccumulator::new(shape.height, shape.width, num_bins)?;
    acc.add(spectrum)?;
    Ok(acc.finish())
}

/// Least-squares slope of `ln(power)` against `ln(radius)` over annuli whose
/// center lies in `[fit_min_fraction, fit_max_fraction] * d_max`. Annulus 0 is
/// never used.
pub fn psd_slope(profile: &PsdProfile, fit_min_fraction: f64, fit_max_fraction: f64) -> Result<f64> {
    if !(fit_min_fraction > 0.0 && fit_min_fraction < fit_max_fraction && fit_max_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "fit range [{fit_min_fraction}, {fit_max_fraction}] not inside (0, 1]"
        )));
    }
    let points: Vec<(f64, f64)> = profile
        .bin_centers
        .iter()
        .zip(&profile.mean_power)
        .skip(1)
        .filter_map(|(&r, p)| {
            let frac = r / profile.d_max;
            match p {
                Some(p) if *p > 0.0 && frac >= fit_min_fraction && frac <= fit_max_fraction => {
                    Some((r.ln(), p.ln()))
                }
                _ => None,
            }
        })
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientData { usable: points.len(), required: 3 });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
