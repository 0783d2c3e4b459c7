use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    apply_mow, regrow, step_robot, Cell, Dynamics, LawnGrid, RobotState, Schedule, SimConfig,
    SimError, SyntheticEmbedder, ThresholdConfig, WorldConfig, GRASS,
};
use crate::feature_space::{global_deviation, DensityParams, Metric};
use crate::policy::{
    calibrate_threshold, process_frame, self_excluded_densities, Threshold, Verdict,
};
use crate::{DensityParams64, Store64};

// independent random streams derived from one seed
const WORLD_STREAM: u64 = 1;
const EMBEDDER_STREAM: u64 = 2;
const RUN_STREAM: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatrolConfig {
    pub samples: usize,
    /// Metres between images.
    pub sample_interval: f64,
}

impl PatrolConfig {
    fn validate(&self) -> Result<(), SimError> {
        if self.samples == 0 {
            return Err(SimError::ConfigInvalid(
                "patrol needs at least one sample".into(),
            ));
        }
        if !(0.5..=1.0).contains(&self.sample_interval) {
            return Err(SimError::ConfigInvalid(format!(
                "sample_interval {} m outside 0.5-1.0 m",
                self.sample_interval
            )));
        }
        Ok(())
    }
}

/// Blade-off exploratory walk. Takes an image every `sample_interval` metres
/// (rounded up to whole steps) until the store holds `samples` embeddings.
pub fn run_patrol<R: Rng + ?Sized>(
    grid: &LawnGrid,
    robot: &mut RobotState,
    embedder: &SyntheticEmbedder,
    config: &PatrolConfig,
    rng: &mut R,
) -> Result<Store64, SimError> {
    config.validate()?;
    let steps_per_sample = ((config.sample_interval / robot.step_length) - 1e-9)
        .ceil()
        .max(1.0) as usize;
    let mut store = Store64::new(embedder.dim(), config.samples)?;
    while !store.is_full() {
        for _ in 0..steps_per_sample {
            *robot = step_robot(robot, grid, rng);
        }
        let cell = &grid.cells()[robot.sensed_cell(grid)];
        store.insert(embedder.embed(&cell.abundance, rng))?;
    }
    Ok(store)
}

/// Everything a season needs besides the world itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonPlan {
    pub params: DensityParams64,
    pub threshold: ThresholdConfig,
    pub schedule: Schedule,
    pub dynamics: Dynamics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CellStats {
    pub visits: u64,
    pub mows: u64,
}

impl CellStats {
    pub fn spares(&self) -> u64 {
        self.visits - self.mows
    }
}

/// Snapshot taken at the end of each cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonRow {
    /// 1-based cycle number.
    pub step: usize,
    pub elapsed_steps: u64,
    pub mean_shannon: f64,
    pub spare_rate: f64,
    pub sigma_d: f64,
    pub mow_events: u64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonReport {
    pub initial_mean_shannon: f64,
    pub rows: Vec<SeasonRow>,
    /// Per-cell visit / mow counts across all mowing passes, row-major.
    pub cell_stats: Vec<CellStats>,
    pub final_grid: LawnGrid,
}

impl SeasonReport {
    pub fn final_mean_shannon(&self) -> f64 {
        self.rows
            .last()
            .map_or(self.initial_mean_shannon, |r| r.mean_shannon)
    }

    pub fn total_mow_events(&self) -> u64 {
        self.rows.iter().map(|r| r.mow_events).sum()
    }

    pub fn overall_spare_rate(&self) -> f64 {
        let visits: u64 = self.cell_stats.iter().map(|c| c.visits).sum();
        let spares: u64 = self.cell_stats.iter().map(CellStats::spares).sum();
        if visits == 0 {
            0.0
        } else {
            spares as f64 / visits as f64
        }
    }

    /// Spare fraction over visits to the cells selected by `include`.
    pub fn spare_rate_where(&self, mut include: impl FnMut(usize) -> bool) -> Option<f64> {
        let (mut visits, mut spares) = (0u64, 0u64);
        for (i, c) in self.cell_stats.iter().enumerate() {
            if include(i) {
                visits += c.visits;
                spares += c.spares();
            }
        }
        (visits > 0).then(|| spares as f64 / visits as f64)
    }

    pub const CSV_HEADER: &'static str =
        "seed,step,elapsed_steps,mean_shannon,spare_rate,sigma_d,mow_events,tau";

    pub fn write_rows_csv<W: Write>(&self, seed: u64, out: &mut W) -> io::Result<()> {
        for r in &self.rows {
            writeln!(
                out,
                "{seed},{},{},{},{},{},{},{}",
                r.step,
                r.elapsed_steps,
                r.mean_shannon,
                r.spare_rate,
                r.sigma_d,
                r.mow_events,
                r.tau
            )?;
        }
        Ok(())
    }

    pub fn grid_csv_header(species_count: usize) -> String {
        let mut h = String::from("seed,x,y,height,shannon,visits,mows,last_mow_step");
        for s in 0..species_count {
            h.push_str(&format!(",p{s}"));
        }
        h
    }

    /// Final state of every cell.
    pub fn write_grid_csv<W: Write>(&self, seed: u64, out: &mut W) -> io::Result<()> {
        for (i, (cell, stats)) in self
            .final_grid
            .cells()
            .iter()
            .zip(&self.cell_stats)
            .enumerate()
        {
            let (x, y) = self.final_grid.coords(i);
            write!(
                out,
                "{seed},{x},{y},{},{},{},{},{}",
                cell.height,
                super::shannon_index(cell),
                stats.visits,
                stats.mows,
                cell.last_mow_step
                    .map(|s| s.to_string())
                    .unwrap_or_default()
            )?;
            for p in &cell.abundance {
                write!(out, ",{p}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Runs `schedule.cycles` cycles of patrol, calibration, a mowing pass and
/// regrowth. During the pass every frame goes through [`process_frame`]; a
/// `Mow` verdict mows the sensed cell.
pub fn run_season<R: Rng + ?Sized>(
    grid: &mut LawnGrid,
    robot: &mut RobotState,
    embedder: &SyntheticEmbedder,
    plan: &SeasonPlan,
    rng: &mut R,
) -> Result<SeasonReport, SimError> {
    let schedule = &plan.schedule;
    if schedule.mow_steps == 0 {
        return Err(SimError::ConfigInvalid("mow_steps must be positive".into()));
    }
    let patrol = PatrolConfig {
        samples: schedule.patrol_samples,
        sample_interval: schedule.sample_interval,
    };
    let initial_mean_shannon = grid.mean_shannon();
    let mut cell_stats = vec![CellStats::default(); grid.len()];
    let mut rows = Vec::with_capacity(schedule.cycles);
    let mut elapsed = 0u64;

    for cycle in 1..=schedule.cycles {
        let mut store = run_patrol(grid, robot, embedder, &patrol, rng)?;
        let threshold = match plan.threshold {
            ThresholdConfig::Quantile(q) => {
                calibrate_threshold(&self_excluded_densities(&store, &plan.params)?, q)?
            }
            ThresholdConfig::Tau(tau) => Threshold::manual(tau)?,
        };
        let mut mows = 0u64;
        for _ in 0..schedule.mow_steps {
            *robot = step_robot(robot, grid, rng);
            let cell = robot.sensed_cell(grid);
            let frame = embedder.embed(&grid.cells()[cell].abundance, rng);
            let record = process_frame(&mut store, frame, &plan.params, &threshold)?;
            cell_stats[cell].visits += 1;
            if record.verdict == Verdict::Mow {
                apply_mow(grid, cell, elapsed, &plan.dynamics)?;
                cell_stats[cell].mows += 1;
                mows += 1;
            }
        }
        regrow(grid, schedule.regrow_steps, &plan.dynamics);
        elapsed += schedule.regrow_steps;
        rows.push(SeasonRow {
            step: cycle,
            elapsed_steps: elapsed,
            mean_shannon: grid.mean_shannon(),
            spare_rate: (schedule.mow_steps as u64 - mows) as f64 / schedule.mow_steps as f64,
            sigma_d: global_deviation(store.embeddings())?,
            mow_events: mows,
            tau: threshold.tau(),
        });
    }
    Ok(SeasonReport {
        initial_mean_shannon,
        rows,
        cell_stats,
        final_grid: grid.clone(),
    })
}

/// A fully instantiated simulation: world, robot, sensor, plan and RNG.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: LawnGrid,
    pub robot: RobotState,
    pub embedder: SyntheticEmbedder,
    pub plan: SeasonPlan,
    pub rng: ChaCha8Rng,
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl Scenario {
    pub fn from_config(config: &SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let seed = config.seed;
        let g = &config.grid;
        let s = g.species_count;
        let h0 = config.dynamics.initial_height;
        let mut world_rng = stream(seed, WORLD_STREAM);
        let grid = LawnGrid::new(g.width, g.height, g.cell_size, s, |_, _| {
            match config.world {
                WorldConfig::Uniform { species } => Cell::pure(species, s, h0),
                WorldConfig::MockUp { flower_fraction } => {
                    if world_rng.random_bool(flower_fraction) {
                        Cell::pure(world_rng.random_range(1..s), s, h0)
                    } else {
                        Cell::pure(GRASS, s, h0)
                    }
                }
                WorldConfig::Meadow {
                    patch_fraction,
                    background_grass,
                } => {
                    let grass = if world_rng.random_bool(patch_fraction) {
                        world_rng.random_range(0.0..=background_grass)
                    } else {
                        world_rng.random_range(background_grass..=1.0)
                    };
                    let weights: Vec<f64> =
                        (1..s).map(|_| world_rng.random_range(0.0..1.0)).collect();
                    let total: f64 = weights.iter().sum();
                    let mut abundance = Vec::with_capacity(s);
                    abundance.push(grass);
                    abundance.extend(weights.iter().map(|w| (1.0 - grass) * w / total));
                    Cell {
                        abundance,
                        height: h0,
                        last_mow_step: None,
                    }
                }
            }
        })?;

        let e = &config.embedder;
        let mut embedder_rng = stream(seed, EMBEDDER_STREAM);
        let embedder = match &e.prototypes {
            Some(p) => {
                let drift = (0..e.dim)
                    .map(|_| {
                        e.drift_scale * embedder_rng.sample::<f64, _>(rand_distr::StandardNormal)
                    })
                    .collect();
                SyntheticEmbedder::new(p.clone(), e.noise_scale, drift)?
            }
            None => SyntheticEmbedder::random(
                s,
                e.dim,
                e.prototype_scale,
                e.noise_scale,
                e.drift_scale,
                &mut embedder_rng,
            )?,
        };

        let mut rng = stream(seed, RUN_STREAM);
        // start mid-way along the west edge
        let heading = rng.random_range(-BOUNCE_START..BOUNCE_START);
        let robot = RobotState::new(
            0.0,
            grid.extent().1 / 2.0,
            heading,
            config.robot.step_length,
            &grid,
        )?;

        let p = &config.policy;
        let metric = if p.normalize {
            Metric::NormalizedEuclidean
        } else {
            Metric::Euclidean
        };
        let plan = SeasonPlan {
            params: DensityParams::new(p.k, p.epsilon)?.with_metric(metric),
            threshold: p.threshold,
            schedule: config.schedule,
            dynamics: config.dynamics,
        };
        Ok(Self {
            grid,
            robot,
            embedder,
            plan,
            rng,
        })
    }

    pub fn patrol(&mut self, samples: usize) -> Result<Store64, SimError> {
        let config = PatrolConfig {
            samples,
            sample_interval: self.plan.schedule.sample_interval,
        };
        run_patrol(
            &self.grid,
            &mut self.robot,
            &self.embedder,
            &config,
            &mut self.rng,
        )
    }

    pub fn run_season(&mut self) -> Result<SeasonReport, SimError> {
        run_season(
            &mut self.grid,
            &mut self.robot,
            &self.embedder,
            &self.plan,
            &mut self.rng,
        )
    }
}

const BOUNCE_START: f64 = std::f64::consts::FRAC_PI_3;
