use std::io::{self, BufReader, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fmm_harness::config::{Experiment, RunConfig};
use fmm_harness::latent_file::read_latent_path;
use fmm_harness::{protocol, run_experiment, write_output, HarnessError};

#[derive(Parser)]
#[command(name = "fmm-lab", version, about = "Frequency modulation experiments on a toy diffusion model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration; missing keys take the command's defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use seeds 0..N (overrides the config).
    #[arg(long, global = true)]
    seeds: Option<usize>,
    /// Worker threads; FMM_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Theoretical and Monte Carlo SNR per radius and timestep.
    AnalyzeSnr,
    /// High-pass filtering of the noisy latent in early, mid and late stages.
    HipassAblation,
    /// Paired original/refined generation with frequency modulation.
    FmmRun,
    /// Sweep alpha or sigma and report trends.
    Sweep,
    /// Gaussian against linear weighting at matched alpha.
    CompareWeighting,
    /// Serve MODULATE requests on stdin/stdout until end of stream.
    ServeModulator,
    /// Print the header of a latent file.
    LatentInfo { path: PathBuf },
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, HarnessError> {
    match std::env::var("FMM_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| HarnessError::Config(format!("FMM_THREADS={v} is not a positive integer"))),
        Err(_) => Ok(flag),
    }
}

fn run_lab(experiment: Experiment, global: &Global) -> Result<(), HarnessError> {
    let mut config = match &global.config {
        Some(path) => RunConfig::load_as(path, Some(experiment))?,
        None => RunConfig::for_experiment(experiment),
    };
    if let Some(out) = &global.out {
        config.out_dir = out.clone();
    }
    if let Some(n) = global.seeds {
        config.seed_count = n;
        config.seeds = None;
    }
    config.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads(global.threads)? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let output = pool.install(|| run_experiment(config.clone()))?;
    for note in &output.notes {
        eprintln!("{note}");
    }
    write_output(&config.out_dir, experiment.name(), &config, &output)?;
    eprintln!("wrote {} rows to {}", output.rows.len(), config.out_dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let experiment = match cli.command {
        Command::AnalyzeSnr => Experiment::AnalyzeSnr,
        Command::HipassAblation => Experiment::HipassAblation,
        Command::FmmRun => Experiment::FmmRun,
        Command::Sweep => Experiment::Sweep,
        Command::CompareWeighting => Experiment::CompareWeighting,
        Command::ServeModulator => {
            let served = protocol::serve(BufReader::new(io::stdin().lock()), BufWriter::new(io::stdout().lock()))?;
            eprintln!("served {served} frames");
            return Ok(());
        }
        Command::LatentInfo { path } => {
            let latent = read_latent_path(&path)?;
            let (lo, hi) = latent
                .values
                .iter()
                .fold((f32::INFINITY, f32::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            println!("dims {:?}, {} values, min {lo}, max {hi}", latent.dims, latent.values.len());
            return Ok(());
        }
    };
    run_lab(experiment, &cli.global)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
