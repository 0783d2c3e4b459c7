use std::path::PathBuf;

use anyhow::{ensure, Context};
use biomow_core::policy::self_excluded_densities;
use biomow_core::store_io::read_embeddings;
use biomow_core::{calibrate_threshold, Embedding64, Store64};
use clap::Args;

use crate::summary::Summary;
use crate::DensityArgs;

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Patrol embedding file.
    #[arg(long)]
    emb: PathBuf,
    #[command(flatten)]
    density: DensityArgs,
    /// Fraction of patrol frames that would be spared.
    #[arg(long, default_value_t = 0.2, value_parser = crate::parse_quantile)]
    quantile: f64,
}

/// Loads a patrol file as a full store.
pub fn load_store(path: &PathBuf) -> anyhow::Result<Store64> {
    let embeddings: Vec<Embedding64> =
        read_embeddings(path).with_context(|| format!("reading {}", path.display()))?;
    ensure!(
        !embeddings.is_empty(),
        "{} holds no embeddings",
        path.display()
    );
    Ok(Store64::from_embeddings(embeddings)?)
}

pub fn run(args: &CalibrateArgs) -> anyhow::Result<()> {
    let params = args.density.params()?;
    let store = load_store(&args.emb)?;
    ensure!(
        store.len() > params.k(),
        "calibration needs more than k = {} patrol embeddings, file has {}",
        params.k(),
        store.len()
    );
    let densities = self_excluded_densities(&store, &params)?;
    let threshold = calibrate_threshold(&densities, args.quantile)?;
    let summary = Summary::of(&densities).expect("nonempty");
    println!(
        "file {} ({} embeddings, dim {})",
        args.emb.display(),
        store.len(),
        store.dim()
    );
    println!(
        "k = {} epsilon = {} quantile = {}",
        params.k(),
        params.epsilon(),
        args.quantile
    );
    println!("densities {}", summary.line());
    println!("tau = {}", threshold.tau());
    Ok(())
}
