//! Run configuration, read from TOML. Unknown keys are rejected everywhere.
//!
//! ```toml
//! experiment = "fmm-run"
//! seed_count = 100          # seeds 0..100, or give `seeds = [..]`
//! num_steps = 50
//! out_dir = "out"
//!
//! [grid]
//! channels = 1
//! height = 64
//! width = 64
//!
//! [schedule]
//! kind = "linear-beta"      # or "cosine"
//! horizon = 1000
//!
//! [prior]
//! beta = 2.0
//! amplitude = 1e5
//! dc_variance = 1e5
//! reference_radius = 1.0
//!
//! [condition]
//! original = { layout = 1, texture = 11 }
//! refined = { layout = 1, texture = 12 }
//!
//! [weights]
//! alpha = 0.2
//! sigma = 0.4
//! kind = "gaussian"         # or "linear"
//! decay = true
//! share_initial_noise = true
//!
//! [filter]
//! cutoffs = [0.10, 0.15, 0.20]
//! shape = "hard"            # or "gaussian-edge"
//!
//! [metrics]
//! band_cutoff = 0.15
//!
//! [snr]
//! timesteps = [100, 500, 900]
//! num_samples = 4096
//! num_bins = 16
//!
//! [sweep]
//! parameter = "alpha"       # or "sigma"
//! values = [0.10, 0.15, 0.20, 0.25, 0.30]
//! ```

use std::path::{Path, PathBuf};

use fmm_core::{
    build_schedule, ConditionSpec, ConditionStyle, FilterShape, NoiseSchedule, PowerLawPrior, ScheduleKind, Shape,
    WeightKind, WeightParams,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    AnalyzeSnr,
    HipassAblation,
    FmmRun,
    Sweep,
    CompareWeighting,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::AnalyzeSnr => "analyze-snr",
            Experiment::HipassAblation => "hipass-ablation",
            Experiment::FmmRun => "fmm-run",
            Experiment::Sweep => "sweep",
            Experiment::CompareWeighting => "compare-weighting",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub kind: ScheduleKind,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub beta: f64,
    pub amplitude: f64,
    pub dc_variance: f64,
    pub reference_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionIds {
    pub layout: u64,
    pub texture: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    pub original: ConditionIds,
    pub refined: ConditionIds,
    pub layout_cutoff: f64,
    pub layout_rms: f64,
    pub texture_low: f64,
    pub texture_high: f64,
    pub texture_order: i32,
    pub texture_rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub alpha: f64,
    pub sigma: f64,
    pub kind: WeightKind,
    pub decay: bool,
    pub share_initial_noise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub cutoffs: Vec<f64>,
    pub shape: FilterShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub band_cutoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrConfig {
    pub timesteps: Vec<usize>,
    pub num_samples: usize,
    pub num_bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Alpha,
    Sigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed_count: usize,
    /// Explicit seeds; overrides `seed_count` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    pub num_steps: usize,
    pub out_dir: PathBuf,
    pub grid: GridConfig,
    pub schedule: ScheduleConfig,
    pub prior: PriorConfig,
    pub condition: ConditionConfig,
    pub weights: WeightConfig,
    pub filter: FilterConfig,
    pub metrics: MetricConfig,
    pub snr: SnrConfig,
    pub sweep: SweepConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::for_experiment(Experiment::FmmRun)
    }
}

impl RunConfig {
    /// Defaults tuned per experiment: 15 steps for the high-pass ablation,
    /// a 32x32 grid and one seed for SNR analysis, 50 steps otherwise.
    pub fn for_experiment(experiment: Experiment) -> Self {
        let style = ConditionStyle::default();
        let (side, num_steps, seed_count) = match experiment {
            Experiment::AnalyzeSnr => (32, 50, 1),
            Experiment::HipassAblation => (64, 15, 200),
            _ => (64, 50, 100),
        };
        Self {
            experiment,
            seed_count,
            seeds: None,
            num_steps,
            out_dir: PathBuf::from("out"),
            grid: GridConfig { channels: 1, height: side, width: side },
            schedule: ScheduleConfig { kind: ScheduleKind::LinearBeta, horizon: 1000 },
            prior: PriorConfig { beta: 2.0, amplitude: 1e5, dc_variance: 1e5, reference_radius: 1.0 },
            condition: ConditionConfig {
                original: ConditionIds { layout: 1, texture: 11 },
                refined: ConditionIds { layout: 1, texture: 12 },
                layout_cutoff: style.layout_cutoff,
                layout_rms: style.layout_rms,
                texture_low: style.texture_low,
                texture_high: style.texture_high,
                texture_order: style.texture_order,
                texture_rms: style.texture_rms,
            },
            weights: WeightConfig {
                alpha: 0.2,
                sigma: 0.4,
                kind: WeightKind::Gaussian,
                decay: true,
                share_initial_noise: true,
            },
            filter: FilterConfig { cutoffs: vec![0.10, 0.15, 0.20], shape: FilterShape::Hard },
            metrics: MetricConfig { band_cutoff: 0.15 },
            snr: SnrConfig { timesteps: vec![100, 500, 900], num_samples: 4096, num_bins: 16 },
            sweep: SweepConfig { parameter: SweepParameter::Alpha, values: vec![0.10, 0.15, 0.20, 0.25, 0.30] },
        }
    }

    /// Parses a possibly partial config. Missing keys take the defaults of the
    /// experiment named in the file (fmm-run when absent).
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::parse(text, None)
    }

    /// Like [`RunConfig::from_toml`] for a known experiment; a file naming a
    /// different experiment is an error.
    pub fn from_toml_as(text: &str, experiment: Experiment) -> Result<Self> {
        Self::parse(text, Some(experiment))
    }

    fn parse(text: &str, expected: Option<Experiment>) -> Result<Self> {
        let cfg_err = |e: &dyn std::fmt::Display| HarnessError::Config(e.to_string());
        let user: toml::Table = toml::from_str(text).map_err(|e| cfg_err(&e))?;
        let named = match user.get("experiment") {
            Some(v) => Some(Experiment::deserialize(v.clone()).map_err(|e| cfg_err(&e))?),
            None => None,
        };
        let experiment = match (named, expected) {
            (Some(n), Some(e)) if n != e => {
                return Err(HarnessError::Config(format!(
                    "config is for {}, not {}",
                    n.name(),
                    e.name()
                )))
            }
            (Some(n), _) => n,
            (None, Some(e)) => e,
            (None, None) => Experiment::FmmRun,
        };
        let mut merged = toml::Table::try_from(Self::for_experiment(experiment)).map_err(|e| cfg_err(&e))?;
        merge(&mut merged, user);
        toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| cfg_err(&e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_as(path, None)
    }

    pub fn load_as(path: &Path, experiment: Option<Experiment>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, experiment)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    /// SHA-256 of the canonical TOML form, hex encoded. The output directory
    /// is left out so that reruns into another directory match.
    pub fn hash(&self) -> String {
        let canonical = RunConfig { out_dir: PathBuf::new(), ..self.clone() };
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }

    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Some(list) => list.clone(),
            None => (0..self.seed_count as u64).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.seed_list().is_empty() {
            return bad("seed list is empty".into());
        }
        if self.num_steps == 0 {
            return bad("num_steps must be at least 1".into());
        }
        if !(self.metrics.band_cutoff > 0.0 && self.metrics.band_cutoff < 1.0) {
            return bad(format!("band_cutoff {} not in (0, 1)", self.metrics.band_cutoff));
        }
        self.shape()?;
        self.schedule()?;
        self.prior()?;
        self.weight_params()?;
        match self.experiment {
            Experiment::AnalyzeSnr => {
                if self.snr.timesteps.is_empty() || self.snr.num_samples < 2 || self.snr.num_bins < 2 {
                    return bad("snr needs timesteps, at least 2 samples and 2 bins".into());
                }
                if let Some(t) = self.snr.timesteps.iter().find(|&&t| t == 0 || t > self.schedule.horizon) {
                    return bad(format!("snr timestep {t} outside [1, {}]", self.schedule.horizon));
                }
            }
            Experiment::HipassAblation => {
                if !self.num_steps.is_multiple_of(3) {
                    return bad(format!("num_steps {} is not divisible into 3 stages", self.num_steps));
                }
                if self.filter.cutoffs.is_empty() || self.filter.cutoffs.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
                    return bad("filter cutoffs must be non-empty and inside (0, 1)".into());
                }
            }
            Experiment::Sweep => {
                if self.sweep.values.len() < 3 {
                    return bad(format!("sweep needs at least 3 values, got {}", self.sweep.values.len()));
                }
                if self.sweep.values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                    return bad("sweep values must be positive".into());
                }
            }
            Experiment::FmmRun | Experiment::CompareWeighting => {}
        }
        if self.num_steps > self.schedule.horizon {
            return bad(format!("num_steps {} exceeds horizon {}", self.num_steps, self.schedule.horizon));
        }
        Ok(())
    }

    pub fn shape(&self) -> Result<Shape> {
        Shape::new(self.grid.channels, self.grid.height, self.grid.width).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn schedule(&self) -> Result<NoiseSchedule> {
        build_schedule(self.schedule.kind, self.schedule.horizon).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn prior(&self) -> Result<PowerLawPrior> {
        PowerLawPrior {
            beta: self.prior.beta,
            amplitude: self.prior.amplitude,
            dc_variance: self.prior.dc_variance,
            reference_radius: self.prior.reference_radius,
        }
        .validated()
        .map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn weight_params(&self) -> Result<WeightParams> {
        WeightParams {
            alpha: self.weights.alpha,
            sigma: self.weights.sigma,
            kind: self.weights.kind,
            horizon: self.schedule.horizon,
            decay: self.weights.decay,
        }
        .validated()
        .map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn style(&self) -> ConditionStyle {
        let c = &self.condition;
        ConditionStyle {
            layout_cutoff: c.layout_cutoff,
            layout_rms: c.layout_rms,
            texture_low: c.texture_low,
            texture_high: c.texture_high,
            texture_order: c.texture_order,
            texture_rms: c.texture_rms,
        }
    }

    pub fn conditions(&self) -> Result<(ConditionSpec, ConditionSpec)> {
        let shape = self.shape()?;
        let style = self.style();
        let make = |ids: ConditionIds| {
            ConditionSpec::generate(ids.layout, ids.texture, shape, &style).map_err(|e| HarnessError::Config(e.to_string()))
        };
        Ok((make(self.condition.original)?, make(self.condition.refined)?))
    }
}

/// Overlays `user` onto `base`, recursing into tables.
fn merge(base: &mut toml::Table, user: toml::Table) {
    for (key, value) in user {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
