use std::path::{Path, PathBuf};

use anyhow::{ensure, Context};
use biomow_core::lawnsim::{Scenario, SeasonReport};
use biomow_core::store_io::write_atomically;
use clap::Args;
use log::info;
use rayon::prelude::*;

use crate::patrol::load_config;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of patrol/mow/regrow cycles; overrides the config schedule.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    steps: Option<u64>,
    /// Comma-separated seeds, run in parallel.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Per-cycle time series (CSV).
    #[arg(long)]
    report: PathBuf,
    /// Final per-cell state (CSV); defaults to `<report stem>_grid.csv`.
    #[arg(long)]
    grid_out: Option<PathBuf>,
}

fn default_grid_path(report: &Path) -> PathBuf {
    let stem = report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    report.with_file_name(format!("{stem}_grid.csv"))
}

pub fn run(args: &SimulateArgs, seed: Option<u64>) -> anyhow::Result<()> {
    let mut config = load_config(args.config.as_ref(), seed)?;
    if let Some(steps) = args.steps {
        config.schedule.cycles = steps as usize;
    }
    let seeds = if args.seeds.is_empty() {
        vec![config.seed]
    } else {
        args.seeds.clone()
    };
    ensure!(!seeds.is_empty(), "no seeds");
    config.validate()?;

    let reports: Vec<(u64, SeasonReport)> = seeds
        .par_iter()
        .map(|&s| {
            let mut c = config.clone();
            c.seed = s;
            let report = Scenario::from_config(&c)?.run_season()?;
            info!("seed {s} finished");
            Ok::<_, anyhow::Error>((s, report))
        })
        .collect::<Result<_, _>>()?;

    let mut rows = format!("{}\n", SeasonReport::CSV_HEADER).into_bytes();
    let mut grid = format!(
        "{}\n",
        SeasonReport::grid_csv_header(config.grid.species_count)
    )
    .into_bytes();
    for (s, r) in &reports {
        r.write_rows_csv(*s, &mut rows)?;
        r.write_grid_csv(*s, &mut grid)?;
    }
    let grid_path = args
        .grid_out
        .clone()
        .unwrap_or_else(|| default_grid_path(&args.report));
    write_atomically(&args.report, &rows)
        .with_context(|| format!("writing {}", args.report.display()))?;
    write_atomically(&grid_path, &grid)
        .with_context(|| format!("writing {}", grid_path.display()))?;

    println!("seed,initial_shannon,final_shannon,spare_rate,mow_events");
    for (s, r) in &reports {
        println!(
            "{s},{:.4},{:.4},{:.4},{}",
            r.initial_mean_shannon,
            r.final_mean_shannon(),
            r.overall_spare_rate(),
            r.total_mow_events()
        );
    }
    Ok(())
}
