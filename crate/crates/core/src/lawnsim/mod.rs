//! Deterministic lawn simulator for exercising the mowing policy.
//!
//! The world is a grid of cells holding species mixes. A random-walking robot
//! senses the cell ahead through a [`SyntheticEmbedder`], and the policy's
//! verdicts feed back into the vegetation via [`apply_mow`] and [`regrow`].
//! Every run is a pure function of its configuration and seed.

mod config;
mod embedder;
mod grid;
mod robot;
mod season;

pub use config::{
    EmbedderConfig, GridConfig, PolicyConfig, RobotConfig, Schedule, SimConfig, ThresholdConfig,
    WorldConfig,
};
pub use embedder::{sense, SyntheticEmbedder};
pub use grid::{apply_mow, regrow, shannon_index, Cell, Dynamics, LawnGrid, GRASS};
pub use robot::{step_robot, RobotState, BOUNCE_JITTER};
pub use season::{
    run_patrol, run_season, CellStats, PatrolConfig, Scenario, SeasonPlan, SeasonReport, SeasonRow,
};

use thiserror::Error;

use crate::feature_space::FeatureError;
use crate::policy::PolicyError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("cell index {index} out of bounds for {len} cells")]
    IndexOutOfBounds { index: usize, len: usize },
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}
