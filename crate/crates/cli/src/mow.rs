use std::path::PathBuf;

use anyhow::{ensure, Context};
use biomow_core::policy::self_excluded_densities;
use biomow_core::store_io::{read_embeddings, write_atomically, DecisionLogWriter};
use biomow_core::{calibrate_threshold, process_frame, Embedding64, Threshold64, Verdict};
use clap::{ArgGroup, Args};
use log::debug;

use crate::calibrate::load_store;
use crate::DensityArgs;

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("threshold").required(true).args(["tau", "quantile"])))]
pub struct MowArgs {
    /// Patrol embedding file that seeds the store.
    #[arg(long)]
    emb: PathBuf,
    /// Frames to decide on, in order.
    #[arg(long)]
    frames: PathBuf,
    /// Fixed density threshold (`inf` spares everything).
    #[arg(long, value_parser = crate::parse_tau)]
    tau: Option<f64>,
    /// Calibrate the threshold from the patrol at this quantile instead.
    #[arg(long, value_parser = crate::parse_quantile)]
    quantile: Option<f64>,
    #[command(flatten)]
    density: DensityArgs,
    /// Decision log output.
    #[arg(long)]
    log: PathBuf,
}

pub fn run(args: &MowArgs) -> anyhow::Result<()> {
    let params = args.density.params()?;
    let mut store = load_store(&args.emb)?;
    let frames: Vec<Embedding64> = read_embeddings(&args.frames)
        .with_context(|| format!("reading {}", args.frames.display()))?;
    if let Some(f) = frames.first() {
        ensure!(
            f.dim() == store.dim(),
            "frames have dimension {}, patrol has {}",
            f.dim(),
            store.dim()
        );
    }
    let threshold = match (args.tau, args.quantile) {
        (Some(tau), _) => Threshold64::manual(tau)?,
        (None, Some(q)) => calibrate_threshold(&self_excluded_densities(&store, &params)?, q)?,
        (None, None) => unreachable!("clap requires one of --tau / --quantile"),
    };
    let mut log = DecisionLogWriter::new(Vec::new());
    let (mut mown, mut spared) = (0u64, 0u64);
    for frame in frames {
        let record = process_frame(&mut store, frame, &params, &threshold)?;
        debug!(
            "frame {} density {} -> {}",
            record.frame_id, record.density, record.verdict
        );
        match record.verdict {
            Verdict::Mow => mown += 1,
            Verdict::Spare => spared += 1,
        }
        log.write(&record)?;
    }
    let bytes = log.into_inner()?;
    write_atomically(&args.log, &bytes)
        .with_context(|| format!("writing {}", args.log.display()))?;
    println!("tau = {}", threshold.tau());
    println!("decisions {} mow {mown} spare {spared}", mown + spared);
    Ok(())
}
