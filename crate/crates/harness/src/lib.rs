//! Runnable experiments, file formats and the modulation server built on
//! `fmm-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod latent_file;
pub mod plot;
pub mod protocol;
pub mod report;
pub mod stats;

use std::path::Path;

pub use config::{Experiment, RunConfig};
pub use error::{HarnessError, Result};
pub use experiments::{run_experiment, ExperimentOutput};

/// Writes `<name>.csv`, one `<name>_<chart>.svg` per chart and any latents
/// under `latents/`. The SVGs are rendered from the rows read back from disk,
/// so a CSV from a different config is refused.
pub fn write_output(out_dir: &Path, name: &str, config: &RunConfig, output: &ExperimentOutput) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{name}.csv"));
    report::write_csv(&csv_path, &output.rows)?;
    let rows = report::read_csv(&csv_path)?;
    let hash = config.hash();
    for (chart_name, chart) in &output.charts {
        plot::plot_rows(&out_dir.join(format!("{name}_{chart_name}.svg")), &rows, &hash, |_| chart.clone())?;
    }
    if !output.latents.is_empty() {
        let dir = out_dir.join("latents");
        std::fs::create_dir_all(&dir)?;
        for (stem, latent) in &output.latents {
            latent_file::write_latent_path(&dir.join(format!("{stem}.fmml")), latent)?;
        }
    }
    std::fs::write(out_dir.join(format!("{name}.config.toml")), config.to_toml())?;
    Ok(())
}
