//! `biomow`: command-line front end for patrol, calibration, mowing decisions,
//! simulation and embedding analysis.

mod analyze;
mod calibrate;
mod mow;
mod patrol;
mod simulate;
mod summary;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "biomow",
    version,
    about = "Biodiversity-aware mowing decisions from embedding density"
)]
struct Cli {
    /// Overrides the seed of any simulation config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a blade-off patrol and write its embeddings.
    Patrol(patrol::PatrolArgs),
    /// Calibrate the density threshold from a patrol file.
    Calibrate(calibrate::CalibrateArgs),
    /// Stream frames through the mowing policy and log every decision.
    Mow(mow::MowArgs),
    /// Run whole seasons for one or more seeds.
    Simulate(simulate::SimulateArgs),
    /// Global deviation, centroid distances, density summary and a PCA projection.
    Analyze(analyze::AnalyzeArgs),
}

/// kNN density flags shared by several subcommands.
#[derive(Debug, Clone, Copy, Args)]
pub struct DensityArgs {
    /// Number of neighbours.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Added to the summed neighbour distance.
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    /// Compare unit-normalised embeddings.
    #[arg(long)]
    pub normalize: bool,
}

impl DensityArgs {
    pub fn params(&self) -> anyhow::Result<biomow_core::DensityParams64> {
        let metric = if self.normalize {
            biomow_core::Metric::NormalizedEuclidean
        } else {
            biomow_core::Metric::Euclidean
        };
        Ok(biomow_core::DensityParams64::new(self.k as usize, self.epsilon)?.with_metric(metric))
    }
}

pub fn parse_quantile(s: &str) -> Result<f64, String> {
    let q: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if q > 0.0 && q < 1.0 {
        Ok(q)
    } else {
        Err(format!(
            "quantile must lie strictly between 0 and 1, got {q}"
        ))
    }
}

pub fn parse_tau(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t >= 0.0 {
        Ok(t)
    } else {
        Err(format!(
            "tau must be a non-negative number (inf allowed), got {t}"
        ))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Debug
        } else {
            log::LevelFilter::Warn
        })
        .init();
    let result = match &cli.command {
        Command::Patrol(a) => patrol::run(a, cli.seed),
        Command::Calibrate(a) => calibrate::run(a),
        Command::Mow(a) => mow::run(a),
        Command::Simulate(a) => simulate::run(a, cli.seed),
        Command::Analyze(a) => analyze::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
