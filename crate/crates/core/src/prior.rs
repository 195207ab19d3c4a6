//! Power-law Gaussian priors and the mean fields that stand in for prompts.

use crate::error::{Error, Result};
use crate::field::{RealField, Shape};
use crate::radial::RadialMap;
use crate::rng::{gaussian_field, STREAM_LAYOUT, STREAM_PRIOR, STREAM_TEXTURE};
use crate::spectrum::{forward_transform, inverse_transform};

/// Stationary Gaussian prior with spectral variance
/// `A * (max(d, 1) / r_ref)^(-beta)` and a separate variance at zero frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawPrior {
    pub beta: f64,
    pub amplitude: f64,
    pub dc_variance: f64,
    pub reference_radius: f64,
}

impl PowerLawPrior {
    /// `dc_variance = amplitude`, `reference_radius = 1`.
    pub fn new(beta: f64, amplitude: f64) -> Result<Self> {
        Self { beta, amplitude, dc_variance: amplitude, reference_radius: 1.0 }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = self.beta > 0.0
            && self.beta.is_finite()
            && self.amplitude >= 0.0
            && self.amplitude.is_finite()
            && self.dc_variance >= 0.0
            && self.dc_variance.is_finite()
            && self.reference_radius > 0.0
            && self.reference_radius.is_finite();
        if !ok {
            return Err(Error::InvalidInput(format!("invalid prior {self:?}")));
        }
        Ok(self)
    }

    /// Variance at radius `d` away from zero frequency.
    pub fn variance(&self, d: f64) -> f64 {
        self.amplitude * (d.max(1.0) / self.reference_radius).powf(-self.beta)
    }

    /// Per-bin variance over a grid; the zero-frequency bin gets `dc_variance`.
    pub fn variance_map(&self, radial: &RadialMap) -> Vec<f64> {
        radial
            .distances()
            .iter()
            .map(|&d| if d == 0.0 { self.dc_variance } else { self.variance(d) })
            .collect()
    }
}

/// Shape of the synthetic layout and texture components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionStyle {
    /// Layout keeps bins with `d / d_max <= layout_cutoff`.
    pub layout_cutoff: f64,
    pub layout_rms: f64,
    /// Butterworth band-pass corners on `d / d_max`.
    pub texture_low: f64,
    pub texture_high: f64,
    pub texture_order: i32,
    pub texture_rms: f64,
}

impl Default for ConditionStyle {
    fn default() -> Self {
        Self {
            layout_cutoff: 0.1,
            layout_rms: 1.0,
            texture_low: 0.3,
            texture_high: 0.6,
            texture_order: 4,
            texture_rms: 1.0,
        }
    }
}

/// Structure must keep this share of its energy at `d / d_max <= 0.15`,
/// texture at `d / d_max >= 0.25`.
pub const BAND_ENERGY_SHARE: f64 = 0.95;
pub const LAYOUT_BAND: f64 = 0.15;
pub const TEXTURE_BAND: f64 = 0.25;

/// Toy prompt: a mean field made of a low-frequency layout and a
/// band-limited texture.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSpec {
    pub layout_id: u64,
    pub texture_id: u64,
    layout: RealField,
    texture: RealField,
    mean_field: RealField,
}

impl ConditionSpec {
    /// Generates both components from their ids.
    pub fn generate(layout_id: u64, texture_id: u64, shape: Shape, style: &ConditionStyle) -> Result<Self> {
        let radial = RadialMap::new(shape.height, shape.width)?;
        let d_max = radial.d_max();
        let layout_gain: Vec<f64> = radial
            .distances()
            .iter()
            .map(|&d| if d / d_max <= style.layout_cutoff { 1.0 } else { 0.0 })
            .collect();
        let n2 = 2 * style.texture_order;
        let texture_gain: Vec<f64> = radial
            .distances()
            .iter()
            .map(|&d| {
                let x = d / d_max;
                if x == 0.0 {
                    return 0.0;
                }
                let hp = 1.0 / (1.0 + (style.texture_low / x).powi(n2)).sqrt();
                let lp = 1.0 / (1.0 + (x / style.texture_high).powi(n2)).sqrt();
                hp * lp
            })
            .collect();
        let layout = filtered_noise(shape, layout_id, STREAM_LAYOUT, &layout_gain, style.layout_rms)?;
        let texture = filtered_noise(shape, texture_id, STREAM_TEXTURE, &texture_gain, style.texture_rms)?;
        Self::from_components(layout_id, texture_id, layout, texture)
    }

    /// Wraps explicit components after checking their band limits. An all-zero
    /// component passes trivially.
    pub fn from_components(layout_id: u64, texture_id: u64, layout: RealField, texture: RealField) -> Result<Self> {
        let radial = RadialMap::new(layout.shape().height, layout.shape().width)?;
        let low = band_energy_share(&layout, &radial, |x| x <= LAYOUT_BAND)?;
        if low < BAND_ENERGY_SHARE {
            return Err(Error::ConditionBand(format!(
                "layout {layout_id} keeps {low:.4} of its energy below {LAYOUT_BAND} d_max"
            )));
        }
        let high = band_energy_share(&texture, &radial, |x| x >= TEXTURE_BAND)?;
        if high < BAND_ENERGY_SHARE {
            return Err(Error::ConditionBand(format!(
                "texture {texture_id} keeps {high:.4} of its energy above {TEXTURE_BAND} d_max"
            )));
        }
        let mean_field = layout.add(&texture)?;
        Ok(Self { layout_id, texture_id, layout, texture, mean_field })
    }

    /// Zero mean field.
    pub fn zero(shape: Shape) -> Self {
        let z = RealField::zeros(shape);
        Self { layout_id: 0, texture_id: 0, layout: z.clone(), texture: z.clone(), mean_field: z }
    }

    pub fn shape(&self) -> Shape {
        self.mean_field.shape()
    }

    pub fn layout(&self) -> &RealField {
        &self.layout
    }

    pub fn texture(&self) -> &RealField {
        &self.texture
    }

    pub fn mean_field(&self) -> &RealField {
        &self.mean_field
    }
}

/// Share of spectral energy in bins whose `d / d_max` satisfies `keep`.
pub fn band_energy_share(field: &RealField, radial: &RadialMap, keep: impl Fn(f64) -> bool) -> Result<f64> {
    let spec = forward_transform(field)?;
    let plane = field.shape().plane();
    let (mut inside, mut total) = (0.0, 0.0);
    for (i, z) in spec.coeffs().iter().enumerate() {
        let e = z.norm_sqr();
        total += e;
        if keep(radial.distances()[i % plane] / radial.d_max()) {
            inside += e;
        }
    }
    Ok(if total == 0.0 { 1.0 } else { inside / total })
}

fn filtered_noise(shape: Shape, seed: u64, stream: u64, gain: &[f64], rms: f64) -> Result<RealField> {
    let white = gaussian_field(shape, seed, stream);
    let shaped = inverse_transform(&forward_transform(&white)?.scale_bins(gain)?)?;
    let current = shaped.rms();
    if current == 0.0 {
        return Ok(shaped);
    }
    shaped.scale(rms / current)
}

/// Draw from the prior around the condition's mean: white noise is shaped in
/// frequency by `sqrt(v / (H W))`, which keeps Hermitian symmetry exact and
/// gives each bin variance `v(d)`.
pub fn synthesize_prior_sample(prior: &PowerLawPrior, condition: &ConditionSpec, seed: u64) -> Result<RealField> {
    let shape = condition.shape();
    let deviation = prior_deviation(prior, shape, seed)?;
    condition.mean_field().add(&deviation)
}

/// Zero-mean part of [`synthesize_prior_sample`].
pub fn prior_deviation(prior: &PowerLawPrior, shape: Shape, seed: u64) -> Result<RealField> {
    let radial = RadialMap::new(shape.height, shape.width)?;
    let n = shape.plane() as f64;
    let gain: Vec<f64> = prior.variance_map(&radial).iter().map(|v| (v / n).sqrt()).collect();
    let white = gaussian_field(shape, seed, STREAM_PRIOR);
    inverse_transform(&forward_transform(&white)?.scale_bins(&gain)?)
}
