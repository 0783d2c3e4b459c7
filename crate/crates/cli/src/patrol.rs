use std::path::PathBuf;

use anyhow::Context;
use biomow_core::lawnsim::{Scenario, SimConfig};
use biomow_core::store_io::write_embeddings;
use clap::Args;
use log::info;

#[derive(Debug, Args)]
pub struct PatrolArgs {
    /// Simulation config (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of images to collect.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long)]
    out: PathBuf,
}

pub fn load_config(path: Option<&PathBuf>, seed: Option<u64>) -> anyhow::Result<SimConfig> {
    let mut config = match path {
        Some(p) => SimConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => SimConfig::default(),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

pub fn run(args: &PatrolArgs, seed: Option<u64>) -> anyhow::Result<()> {
    let config = load_config(args.config.as_ref(), seed)?;
    let mut scenario = Scenario::from_config(&config)?;
    let store = scenario.patrol(args.samples as usize)?;
    let embeddings: Vec<_> = store.embeddings().cloned().collect();
    let bytes = write_embeddings(&args.out, &embeddings)
        .with_context(|| format!("writing {}", args.out.display()))?;
    info!("patrol with seed {} wrote {bytes} bytes", config.seed);
    println!(
        "wrote {} embeddings (dim {}) to {}",
        embeddings.len(),
        store.dim(),
        args.out.display()
    );
    Ok(())
}
