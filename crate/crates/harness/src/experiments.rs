//! Desk-scale experiments on the toy diffusion model. Each returns tidy rows
//! plus charts; nothing here touches the filesystem.

use fmm_core::metrics::MS_SSIM_MIN_SIDE;
use fmm_core::sampler::initial_latent;
use fmm_core::{
    band_distance, empirical_snr, ms_ssim, psnr, sample_from, ssim, theoretical_snr_profile, ConditionSpec, FilterSpec,
    HighPassHook, ModulationHook, NoiseSchedule, PowerLawPrior, RealField, Shape, TrajectoryRecord, WeightKind,
    WeightParams,
};
use rayon::prelude::*;

use crate::config::{Experiment, RunConfig, SweepParameter};
use crate::error::Result;
use crate::latent_file::LatentFile;
use crate::plot::{Chart, Series};
use crate::report::{mean_where, ReportRow, RowTemplate};
use crate::stats::{sign_test_less, Trend};

/// Everything derived once from a validated config.
#[derive(Debug, Clone)]
pub struct Lab {
    pub config: RunConfig,
    pub hash: String,
    pub shape: Shape,
    pub schedule: NoiseSchedule,
    pub prior: PowerLawPrior,
    pub cond_ori: ConditionSpec,
    pub cond_ref: ConditionSpec,
}

impl Lab {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let (cond_ori, cond_ref) = config.conditions()?;
        Ok(Self {
            hash: config.hash(),
            shape: config.shape()?,
            schedule: config.schedule()?,
            prior: config.prior()?,
            cond_ori,
            cond_ref,
            config,
        })
    }

    fn template(&self) -> RowTemplate {
        RowTemplate::new(self.config.experiment.name(), &self.hash)
    }

    fn initial(&self, seed: u64) -> (RealField, RealField) {
        let z_ori = initial_latent(&self.cond_ori, seed, false);
        let z_ref = if self.config.weights.share_initial_noise {
            z_ori.clone()
        } else {
            initial_latent(&self.cond_ref, seed, true)
        };
        (z_ori, z_ref)
    }

    fn run(&self, cond: &ConditionSpec, seed: u64, z: RealField, hook: Option<&mut dyn fmm_core::LatentHook>) -> Result<TrajectoryRecord> {
        let steps = self.config.num_steps;
        Ok(match hook {
            Some(h) => sample_from(cond, &self.prior, &self.schedule, steps, seed, z, &mut [h])?,
            None => sample_from(cond, &self.prior, &self.schedule, steps, seed, z, &mut [])?,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<ReportRow>,
    pub charts: Vec<(String, Chart)>,
    /// File stem and latent, written under `latents/`.
    pub latents: Vec<(String, LatentFile)>,
    /// Human-readable summary lines and warnings.
    pub notes: Vec<String>,
}

pub fn run_experiment(config: RunConfig) -> Result<ExperimentOutput> {
    let lab = Lab::new(config)?;
    match lab.config.experiment {
        Experiment::AnalyzeSnr => analyze_snr(&lab),
        Experiment::HipassAblation => hipass_ablation(&lab),
        Experiment::FmmRun => fmm_run(&lab),
        Experiment::Sweep => sweep(&lab),
        Experiment::CompareWeighting => compare_weighting(&lab),
    }
}

fn ms_ssim_note(shape: Shape) -> Option<String> {
    (shape.height.min(shape.width) < MS_SSIM_MIN_SIDE).then(|| {
        format!(
            "warning: ms-ssim needs sides >= {MS_SSIM_MIN_SIDE}, grid is {}x{}; reporting ssim only",
            shape.height, shape.width
        )
    })
}

type Comparison = Vec<(&'static str, f64)>;
pub type NamedMetrics = Vec<(String, f64)>;

/// Similarity of `a` to reference `b`; the range is the reference's span.
fn compare(a: &RealField, b: &RealField, cutoff: f64) -> Result<Comparison> {
    let range = b.peak_to_peak().max(f64::MIN_POSITIVE);
    let (low, high) = band_distance(a, b, cutoff)?;
    let mut out = vec![("band_low", low), ("band_high", high), ("ssim", ssim(a, b, range)?), ("psnr", psnr(a, b, range)?)];
    if a.shape().height.min(a.shape().width) >= MS_SSIM_MIN_SIDE {
        out.push(("ms_ssim", ms_ssim(a, b, range)?));
    }
    Ok(out)
}

pub fn analyze_snr(lab: &Lab) -> Result<ExperimentOutput> {
    let cfg = &lab.config.snr;
    let tpl = lab.template();
    let mut out = ExperimentOutput::default();
    let mut series = Vec::new();
    let seeds = lab.config.seed_list();
    for &t in &cfg.timesteps {
        let theory = theoretical_snr_profile(lab.shape, cfg.num_bins, t, &lab.prior, &lab.schedule)?;
        let empirical = seeds
            .par_iter()
            .map(|&s| empirical_snr(&lab.prior, &lab.cond_ori, &lab.schedule, t, cfg.num_samples, cfg.num_bins, s))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let centers = &empirical[0].signal.bin_centers;
        let tpl_t = tpl.with(|r| r.timestep = Some(t));
        let mut points = Vec::new();
        for (i, th) in theory.iter().enumerate() {
            let Some(th) = th else { continue };
            let tpl_b = tpl_t.with(|r| r.radius = Some(centers[i]));
            out.rows.push(tpl_b.row("snr.theoretical", *th));
            points.push((centers[i], *th));
            for (seed, emp) in seeds.iter().zip(&empirical) {
                if let Some(e) = emp.ratio[i] {
                    let tpl_s = tpl_b.with(|r| r.seed = Some(*seed));
                    out.rows.push(tpl_s.row("snr.empirical", e));
                    out.rows.push(tpl_s.row("snr.ratio", e / th));
                }
            }
        }
        series.push(Series { label: format!("t = {t}"), points });
    }
    out.charts.push((
        "snr".into(),
        Chart {
            title: "Theoretical SNR by radius".into(),
            x_label: "radial frequency".into(),
            y_label: "SNR".into(),
            log_y: true,
            series,
        },
    ));
    Ok(out)
}

pub const STAGES: [&str; 3] = ["early", "mid", "late"];

pub fn hipass_ablation(lab: &Lab) -> Result<ExperimentOutput> {
    let cfg = &lab.config;
    let per_stage = cfg.num_steps / 3;
    let seeds = cfg.seed_list();
    let cutoff = cfg.metrics.band_cutoff;
    let tpl = lab.template();
    let mut out = ExperimentOutput::default();
    out.notes.extend(ms_ssim_note(lab.shape));

    // per seed: per rho: per stage: metrics
    let results = seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<Vec<Comparison>>> {
            let z = initial_latent(&lab.cond_ori, seed, false);
            let reference = lab.run(&lab.cond_ori, seed, z.clone(), None)?.final_latent;
            cfg.filter
                .cutoffs
                .iter()
                .map(|&rho| {
                    (0..3)
                        .map(|k| {
                            let spec = FilterSpec::new(rho, cfg.filter.shape, (k * per_stage + 1, (k + 1) * per_stage))?;
                            let mut hook = HighPassHook { spec };
                            let filtered = lab.run(&lab.cond_ori, seed, z.clone(), Some(&mut hook))?.final_latent;
                            compare(&filtered, &reference, cutoff)
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut series = Vec::new();
    for (ri, &rho) in cfg.filter.cutoffs.iter().enumerate() {
        let tpl_r = tpl.with(|r| r.rho = Some(rho));
        for (k, stage) in STAGES.iter().enumerate() {
            let tpl_s = tpl_r.with(|r| r.stage = Some((*stage).into()));
            for (seed, res) in seeds.iter().zip(&results) {
                let tpl_seed = tpl_s.with(|r| r.seed = Some(*seed));
                out.rows.extend(res[ri][k].iter().map(|(m, v)| tpl_seed.row(m, *v)));
            }
        }
        let ssim_of = |k: usize| -> Vec<f64> {
            results.iter().map(|res| res[ri][k].iter().find(|m| m.0 == "ssim").unwrap().1).collect()
        };
        let stage_ssim: Vec<Vec<f64>> = (0..3).map(ssim_of).collect();
        let mut means = Vec::new();
        for (k, stage) in STAGES.iter().enumerate() {
            let tpl_s = tpl_r.with(|r| r.stage = Some((*stage).into()));
            for metric in res_metrics(&results[0][ri][k]) {
                let m = results.iter().map(|res| res[ri][k].iter().find(|x| x.0 == metric).unwrap().1).sum::<f64>()
                    / results.len() as f64;
                out.rows.push(tpl_s.row(&format!("mean.{metric}"), m));
            }
            means.push(stage_ssim[k].iter().sum::<f64>() / stage_ssim[k].len() as f64);
        }
        let p_em = sign_test_less(&stage_ssim[0], &stage_ssim[1]);
        let p_ml = sign_test_less(&stage_ssim[1], &stage_ssim[2]);
        out.rows.push(tpl_r.row("sign_p.ssim.early_lt_mid", p_em));
        out.rows.push(tpl_r.row("sign_p.ssim.mid_lt_late", p_ml));
        out.notes.push(format!(
            "rho {rho}: mean ssim early {:.4} mid {:.4} late {:.4}; sign test p(early<mid) {p_em:.3e} p(mid<late) {p_ml:.3e}",
            means[0], means[1], means[2]
        ));
        series.push(Series {
            label: format!("rho = {rho}"),
            points: means.iter().enumerate().map(|(k, &m)| ((k + 1) as f64, m)).collect(),
        });
    }
    out.charts.push((
        "hipass".into(),
        Chart {
            title: "SSIM to reference by filtered stage (1 early, 2 mid, 3 late)".into(),
            x_label: "stage".into(),
            y_label: "mean SSIM".into(),
            log_y: false,
            series,
        },
    ));
    Ok(out)
}

fn res_metrics(metrics: &[(&'static str, f64)]) -> Vec<&'static str> {
    metrics.iter().map(|m| m.0).collect()
}

/// Final latents of one FMM comparison.
#[derive(Debug, Clone)]
pub struct FmmOutcome {
    pub original: RealField,
    /// Refined condition with modulation.
    pub refined: RealField,
    /// Refined condition without modulation; doubles as the semantic target.
    pub baseline: RealField,
}

/// Original trajectory and no-modulation baseline for one seed.
fn fmm_references(lab: &Lab, seed: u64) -> Result<(TrajectoryRecord, RealField, RealField)> {
    let (z_ori, z_ref) = lab.initial(seed);
    let original = lab.run(&lab.cond_ori, seed, z_ori, None)?;
    let baseline = lab.run(&lab.cond_ref, seed, z_ref.clone(), None)?.final_latent;
    Ok((original, baseline, z_ref))
}

fn fmm_refined(lab: &Lab, seed: u64, original: &TrajectoryRecord, z_ref: RealField, params: WeightParams) -> Result<RealField> {
    let mut hook = ModulationHook::new(original, params)?;
    Ok(lab.run(&lab.cond_ref, seed, z_ref, Some(&mut hook))?.final_latent)
}

pub fn fmm_outcome(lab: &Lab, seed: u64, params: WeightParams) -> Result<FmmOutcome> {
    let (original, baseline, z_ref) = fmm_references(lab, seed)?;
    let refined = fmm_refined(lab, seed, &original, z_ref, params)?;
    Ok(FmmOutcome { original: original.final_latent, refined, baseline })
}

/// Metric names are `subject.reference.metric`; the target is the baseline.
pub fn fmm_metrics(o: &FmmOutcome, cutoff: f64) -> Result<NamedMetrics> {
    let mut out = Vec::new();
    let mut push = |subject: &str, reference: &str, a: &RealField, b: &RealField| -> Result<()> {
        for (m, v) in compare(a, b, cutoff)? {
            out.push((format!("{subject}.{reference}.{m}"), v));
        }
        Ok(())
    };
    push("fmm", "original", &o.refined, &o.original)?;
    push("baseline", "original", &o.baseline, &o.original)?;
    push("fmm", "target", &o.refined, &o.baseline)?;
    push("original", "target", &o.original, &o.baseline)?;
    Ok(out)
}

fn metric(values: &[(String, f64)], name: &str) -> f64 {
    values.iter().find(|m| m.0 == name).map(|m| m.1).unwrap_or(f64::NAN)
}

fn mean_metric(per_seed: &[Vec<(String, f64)>], name: &str) -> f64 {
    per_seed.iter().map(|v| metric(v, name)).sum::<f64>() / per_seed.len() as f64
}

/// Mean rows plus the two balance ratios.
fn fmm_summary(tpl: &RowTemplate, per_seed: &[Vec<(String, f64)>]) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = per_seed[0]
        .iter()
        .map(|(name, _)| tpl.row(&format!("mean.{name}"), mean_metric(per_seed, name)))
        .collect();
    let high = mean_metric(per_seed, "fmm.target.band_high") / mean_metric(per_seed, "original.target.band_high");
    let low = mean_metric(per_seed, "fmm.original.band_low") / mean_metric(per_seed, "baseline.original.band_low");
    rows.push(tpl.row("balance.high_band_degradation", high));
    rows.push(tpl.row("balance.low_band_ratio", low));
    rows
}

fn kind_name(kind: WeightKind) -> &'static str {
    match kind {
        WeightKind::Gaussian => "gaussian",
        WeightKind::Linear => "linear",
    }
}

fn params_template(tpl: &RowTemplate, p: &WeightParams) -> RowTemplate {
    tpl.with(|r| {
        r.alpha = Some(p.alpha);
        r.sigma = Some(p.sigma);
        r.kind = Some(kind_name(p.kind).into());
    })
}

pub fn fmm_run(lab: &Lab) -> Result<ExperimentOutput> {
    let cfg = &lab.config;
    let params = cfg.weight_params()?;
    let seeds = cfg.seed_list();
    let tpl = params_template(&lab.template(), &params);
    let mut out = ExperimentOutput::default();
    out.notes.extend(ms_ssim_note(lab.shape));
    let outcomes = seeds
        .par_iter()
        .map(|&s| {
            let o = fmm_outcome(lab, s, params)?;
            let m = fmm_metrics(&o, cfg.metrics.band_cutoff)?;
            Ok((o, m))
        })
        .collect::<Result<Vec<_>>>()?;
    for (seed, (o, m)) in seeds.iter().zip(&outcomes) {
        let tpl_s = tpl.with(|r| r.seed = Some(*seed));
        out.rows.extend(m.iter().map(|(name, v)| tpl_s.row(name, *v)));
        for (label, field) in [("original", &o.original), ("refined", &o.refined), ("baseline", &o.baseline)] {
            out.latents.push((format!("seed{seed:05}_{label}"), LatentFile::from_field(field)));
        }
    }
    let per_seed: Vec<_> = outcomes.into_iter().map(|(_, m)| m).collect();
    out.rows.extend(fmm_summary(&tpl, &per_seed));
    let get = |name: &str| mean_metric(&per_seed, name);
    out.notes.push(format!(
        "low band to original: fmm {:.4} vs baseline {:.4}; high band to target: fmm {:.4} vs original {:.4}",
        get("fmm.original.band_low"),
        get("baseline.original.band_low"),
        get("fmm.target.band_high"),
        get("original.target.band_high"),
    ));
    let seed_axis: Vec<f64> = seeds.iter().map(|&s| s as f64).collect();
    let series = ["fmm.original.band_low", "baseline.original.band_low"]
        .iter()
        .map(|name| Series {
            label: (*name).into(),
            points: seed_axis.iter().zip(&per_seed).map(|(&x, m)| (x, metric(m, name))).collect(),
        })
        .collect();
    out.charts.push((
        "fmm".into(),
        Chart {
            title: "Low-band distance to original per seed".into(),
            x_label: "seed".into(),
            y_label: "RMS spectral distance".into(),
            log_y: false,
            series,
        },
    ));
    Ok(out)
}

/// Per seed and per parameter point metrics, sharing the original trajectory
/// and baseline across points.
fn fmm_grid(lab: &Lab, points: &[WeightParams]) -> Result<Vec<Vec<NamedMetrics>>> {
    let cutoff = lab.config.metrics.band_cutoff;
    lab.config
        .seed_list()
        .par_iter()
        .map(|&seed| {
            let (original, baseline, z_ref) = fmm_references(lab, seed)?;
            points
                .iter()
                .map(|&p| {
                    let refined = fmm_refined(lab, seed, &original, z_ref.clone(), p)?;
                    let o = FmmOutcome { original: original.final_latent.clone(), refined, baseline: baseline.clone() };
                    fmm_metrics(&o, cutoff)
                })
                .collect()
        })
        .collect()
}

pub fn sweep(lab: &Lab) -> Result<ExperimentOutput> {
    let cfg = &lab.config;
    let base = cfg.weight_params()?;
    let points: Vec<WeightParams> = cfg
        .sweep
        .values
        .iter()
        .map(|&v| match cfg.sweep.parameter {
            SweepParameter::Alpha => WeightParams { alpha: v, ..base },
            SweepParameter::Sigma => WeightParams { sigma: v, ..base },
        })
        .collect();
    let grid = fmm_grid(lab, &points)?;
    let seeds = cfg.seed_list();
    let tpl = lab.template();
    let mut out = ExperimentOutput::default();
    out.notes.extend(ms_ssim_note(lab.shape));
    let mut low_means = Vec::new();
    let mut high_means = Vec::new();
    for (pi, p) in points.iter().enumerate() {
        let tpl_p = params_template(&tpl, p);
        for (seed, per_point) in seeds.iter().zip(&grid) {
            let tpl_s = tpl_p.with(|r| r.seed = Some(*seed));
            out.rows.extend(per_point[pi].iter().map(|(n, v)| tpl_s.row(n, *v)));
        }
        let per_seed: Vec<_> = grid.iter().map(|g| g[pi].clone()).collect();
        out.rows.extend(fmm_summary(&tpl_p, &per_seed));
        low_means.push(mean_metric(&per_seed, "fmm.original.band_low"));
        high_means.push(mean_metric(&per_seed, "fmm.target.band_high"));
    }
    let name = match cfg.sweep.parameter {
        SweepParameter::Alpha => "alpha",
        SweepParameter::Sigma => "sigma",
    };
    let (t_low, t_high) = (Trend::of(&low_means), Trend::of(&high_means));
    let tpl_trend = tpl.with(|r| r.kind = Some(kind_name(base.kind).into()));
    out.rows.push(tpl_trend.row("trend.fmm.original.band_low", t_low.code()));
    out.rows.push(tpl_trend.row("trend.fmm.target.band_high", t_high.code()));
    out.notes.push(format!(
        "{name} sweep: low-band distance to original {} ({}), high-band distance to target {} ({})",
        t_low.label(),
        fmt_list(&low_means),
        t_high.label(),
        fmt_list(&high_means)
    ));
    let xs = &cfg.sweep.values;
    out.charts.push((
        "sweep".into(),
        Chart {
            title: format!("Mean band distances across {name}"),
            x_label: name.into(),
            y_label: "RMS spectral distance".into(),
            log_y: false,
            series: vec![
                Series { label: "low band to original".into(), points: xs.iter().copied().zip(low_means).collect() },
                Series { label: "high band to target".into(), points: xs.iter().copied().zip(high_means).collect() },
            ],
        },
    ));
    Ok(out)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

/// Structure-side metrics compared between weighting kinds.
pub const STRUCTURE_METRICS: [&str; 3] = ["fmm.original.band_low", "fmm.original.ssim", "fmm.original.psnr"];

pub fn compare_weighting(lab: &Lab) -> Result<ExperimentOutput> {
    let cfg = &lab.config;
    let base = cfg.weight_params()?;
    let kinds = [WeightParams { kind: WeightKind::Gaussian, ..base }, WeightParams { kind: WeightKind::Linear, ..base }];
    let grid = fmm_grid(lab, &kinds)?;
    let seeds = cfg.seed_list();
    let tpl = lab.template();
    let mut out = ExperimentOutput::default();
    out.notes.extend(ms_ssim_note(lab.shape));
    for (ki, p) in kinds.iter().enumerate() {
        let tpl_k = params_template(&tpl, p);
        for (seed, g) in seeds.iter().zip(&grid) {
            let tpl_s = tpl_k.with(|r| r.seed = Some(*seed));
            out.rows.extend(g[ki].iter().map(|(n, v)| tpl_s.row(n, *v)));
        }
        let per_seed: Vec<_> = grid.iter().map(|g| g[ki].clone()).collect();
        out.rows.extend(fmm_summary(&tpl_k, &per_seed));
    }
    let tpl_a = tpl.with(|r| r.alpha = Some(base.alpha));
    for (seed, g) in seeds.iter().zip(&grid) {
        let tpl_s = tpl_a.with(|r| r.seed = Some(*seed));
        for (name, gv) in &g[0] {
            out.rows.push(tpl_s.row(&format!("delta.{name}"), metric(&g[1], name) - gv));
        }
    }
    let column = |ki: usize, name: &str| -> Vec<f64> { grid.iter().map(|g| metric(&g[ki], name)).collect() };
    let p_high = sign_test_less(&column(0, "fmm.target.band_high"), &column(1, "fmm.target.band_high"));
    out.rows.push(tpl_a.row("sign_p.gaussian_lt_linear.fmm.target.band_high", p_high));
    let mut gaps = Vec::new();
    for name in STRUCTURE_METRICS {
        let g = column(0, name).iter().sum::<f64>() / seeds.len() as f64;
        let l = column(1, name).iter().sum::<f64>() / seeds.len() as f64;
        let gap = (l - g).abs() / g.abs();
        out.rows.push(tpl_a.row(&format!("relative_gap.{name}"), gap));
        gaps.push(format!("{name} {gap:.4}"));
    }
    out.notes.push(format!(
        "linear vs gaussian: sign test p(gaussian closer to target in high band) {p_high:.3e}; relative gaps {}",
        gaps.join(", ")
    ));
    let hi = |ki: usize| column(ki, "fmm.target.band_high");
    out.charts.push((
        "weighting".into(),
        Chart {
            title: "High-band distance to target per seed".into(),
            x_label: "seed".into(),
            y_label: "RMS spectral distance".into(),
            log_y: false,
            series: (0..2)
                .map(|ki| Series {
                    label: kind_name(kinds[ki].kind).into(),
                    points: seeds.iter().map(|&s| s as f64).zip(hi(ki)).collect(),
                })
                .collect(),
        },
    ));
    Ok(out)
}

/// Mean of a metric over per-seed rows, optionally restricted to one kind,
/// stage or rho. Used by callers that post-process reports.
pub fn mean_of(rows: &[ReportRow], metric: &str, stage: Option<&str>, rho: Option<f64>, kind: Option<&str>) -> Option<f64> {
    mean_where(rows, |r| {
        r.seed.is_some()
            && r.metric == metric
            && stage.is_none_or(|s| r.stage.as_deref() == Some(s))
            && rho.is_none_or(|x| r.rho == Some(x))
            && kind.is_none_or(|k| r.kind.as_deref() == Some(k))
    })
}
