//! Tidy CSV reports: one metric value per row, every row stamped with the
//! hash of the config that produced it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ReportRow {
    pub experiment: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub kind: Option<String>,
    pub stage: Option<String>,
    pub rho: Option<f64>,
    pub timestep: Option<usize>,
    pub radius: Option<f64>,
    pub metric: String,
    pub value: f64,
}

/// Row builder that carries the fixed columns of one run.
#[derive(Debug, Clone)]
pub struct RowTemplate {
    base: ReportRow,
}

impl RowTemplate {
    pub fn new(experiment: &str, config_hash: &str) -> Self {
        Self {
            base: ReportRow { experiment: experiment.into(), config_hash: config_hash.into(), ..Default::default() },
        }
    }

    pub fn with(&self, f: impl FnOnce(&mut ReportRow)) -> Self {
        let mut base = self.base.clone();
        f(&mut base);
        Self { base }
    }

    pub fn row(&self, metric: &str, value: f64) -> ReportRow {
        ReportRow { metric: metric.into(), value, ..self.base.clone() }
    }
}

pub fn write_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

/// Fails unless every row carries `expected_hash`.
pub fn check_hash(rows: &[ReportRow], expected_hash: &str) -> Result<()> {
    match rows.iter().position(|r| r.config_hash != expected_hash) {
        Some(i) => Err(HarnessError::Report(format!(
            "row {i} has config hash {}, expected {expected_hash}",
            rows[i].config_hash
        ))),
        None => Ok(()),
    }
}

/// Mean of `value` over rows matching `pred`.
pub fn mean_where(rows: &[ReportRow], pred: impl Fn(&ReportRow) -> bool) -> Option<f64> {
    let (s, n) = rows.iter().filter(|r| pred(r)).fold((0.0, 0usize), |(s, n), r| (s + r.value, n + 1));
    (n > 0).then(|| s / n as f64)
}
