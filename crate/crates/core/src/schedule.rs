//! Noise schedules and the forward (noising) process.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::RealField;

/// Upper clip on per-step betas, keeps every alpha_bar positive.
pub const MAX_BETA: f64 = 0.999;
const COSINE_OFFSET: f64 = 0.008;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    LinearBeta,
    Cosine,
}

/// Cumulative signal retention `alpha_bar[t]` for `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    kind: Option<ScheduleKind>,
    alpha_bar: Vec<f64>,
}

pub fn build_schedule(kind: ScheduleKind, horizon: usize) -> Result<NoiseSchedule> {
    if horizon < 2 {
        return Err(Error::InvalidSchedule(format!("T = {horizon}, need at least 2")));
    }
    let t_f = horizon as f64;
    let betas: Vec<f64> = match kind {
        ScheduleKind::LinearBeta => {
            let (lo, hi) = (1e-4 * 1000.0 / t_f, 0.02 * 1000.0 / t_f);
            (0..horizon)
                .map(|i| (lo + (hi - lo) * i as f64 / (t_f - 1.0)).min(MAX_BETA))
                .collect()
        }
        ScheduleKind::Cosine => {
            let f = |t: f64| ((t / t_f + COSINE_OFFSET) / (1.0 + COSINE_OFFSET) * std::f64::consts::FRAC_PI_2).cos().powi(2);
            (1..=horizon)
                .map(|t| (1.0 - f(t as f64) / f(t as f64 - 1.0)).clamp(0.0, MAX_BETA))
                .collect()
        }
    };
    let mut alpha_bar = Vec::with_capacity(horizon + 1);
    alpha_bar.push(1.0);
    let mut acc = 1.0;
    for b in betas {
        acc *= 1.0 - b;
        alpha_bar.push(acc);
    }
    let schedule = NoiseSchedule { kind: Some(kind), alpha_bar };
    schedule.validate()?;
    Ok(schedule)
}

impl NoiseSchedule {
    /// Schedule from explicit values; `alpha_bar[0]` must be 1 and the sequence
    /// strictly decreasing inside `(0, 1]`.
    pub fn from_alpha_bar(alpha_bar: Vec<f64>) -> Result<Self> {
        let s = Self { kind: None, alpha_bar };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let a = &self.alpha_bar;
        if a.len() < 2 || a[0] != 1.0 {
            return Err(Error::InvalidSchedule("alpha_bar must start at exactly 1".into()));
        }
        if a.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
            return Err(Error::InvalidSchedule("alpha_bar must lie in (0, 1]".into()));
        }
        if a.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidSchedule("alpha_bar must be strictly decreasing".into()));
        }
        Ok(())
    }

    pub fn kind(&self) -> Option<ScheduleKind> {
        self.kind
    }

    pub fn horizon(&self) -> usize {
        self.alpha_bar.len() - 1
    }

    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bar
    }

    pub fn alpha_bar(&self, t: usize) -> Result<f64> {
        self.alpha_bar
            .get(t)
            .copied()
            .ok_or(Error::InvalidTimestep { t, min: 0, max: self.horizon() })
    }

    /// Sampling grid: `num_steps` timesteps rounded from an even spacing of
    /// `T` down to 1. A single step uses `[T]`.
    pub fn timesteps(&self, num_steps: usize) -> Result<Vec<usize>> {
        let horizon = self.horizon();
        if num_steps == 0 || num_steps > horizon {
            return Err(Error::InvalidConfig(format!(
                "num_steps {num_steps} must be in [1, {horizon}]"
            )));
        }
        if num_steps == 1 {
            return Ok(vec![horizon]);
        }
        let span = (horizon - 1) as f64 / (num_steps - 1) as f64;
        Ok((0..num_steps)
            .map(|i| (horizon as f64 - span * i as f64).round() as usize)
            .collect())
    }
}

/// `sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) noise`.
pub fn forward_diffuse(
    z0: &RealField,
    t: usize,
    noise: &RealField,
    schedule: &NoiseSchedule,
) -> Result<RealField> {
    let a = schedule.alpha_bar(t)?;
    z0.lin_comb(a.sqrt(), noise, (1.0 - a).sqrt())
}
