use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dynamics, SimError};

/// Full simulation setup, read from a TOML document. Every section is optional.
///
/// ```toml
/// seed = 7
///
/// [grid]
/// width = 24
/// height = 16
///
/// [world]
/// kind = "mock_up"
/// flower_fraction = 0.1
///
/// [policy]
/// k = 10
/// threshold = { quantile = 0.2 }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub grid: GridConfig,
    pub world: WorldConfig,
    pub embedder: EmbedderConfig,
    pub dynamics: Dynamics,
    pub robot: RobotConfig,
    pub policy: PolicyConfig,
    pub schedule: Schedule,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let config: Self =
            toml::from_str(text).map_err(|e| SimError::ConfigInvalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let invalid = |msg: String| Err(SimError::ConfigInvalid(msg));
        let g = &self.grid;
        if g.width == 0 || g.height == 0 || g.species_count < 2 {
            return invalid("grid needs positive dimensions and at least two species".into());
        }
        if !(g.cell_size.is_finite() && g.cell_size > 0.0) {
            return invalid(format!("cell_size must be positive, got {}", g.cell_size));
        }
        match self.world {
            WorldConfig::Uniform { species } if species >= g.species_count => {
                return invalid(format!("uniform species {species} >= species_count"));
            }
            WorldConfig::MockUp { flower_fraction } if !(0.0..=1.0).contains(&flower_fraction) => {
                return invalid(format!("flower_fraction {flower_fraction} outside [0, 1]"));
            }
            WorldConfig::Meadow {
                patch_fraction,
                background_grass,
            } if !(0.0..=1.0).contains(&patch_fraction)
                || !(0.0..=1.0).contains(&background_grass) =>
            {
                return invalid("meadow fractions must lie in [0, 1]".into());
            }
            _ => {}
        }
        let e = &self.embedder;
        if e.dim == 0 {
            return invalid("embedder dim must be positive".into());
        }
        if let Some(p) = &e.prototypes {
            if p.len() != g.species_count || p.iter().any(|v| v.len() != e.dim) {
                return invalid(
                    "explicit prototypes must be species_count rows of length dim".into(),
                );
            }
        }
        for (name, v) in [
            ("noise_scale", e.noise_scale),
            ("drift_scale", e.drift_scale),
            ("prototype_scale", e.prototype_scale),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return invalid(format!("{name} must be >= 0, got {v}"));
            }
        }
        self.dynamics.validate()?;
        if !(self.robot.step_length.is_finite() && self.robot.step_length > 0.0) {
            return invalid(format!(
                "step_length must be positive, got {}",
                self.robot.step_length
            ));
        }
        let p = &self.policy;
        if p.k == 0 || !(p.epsilon.is_finite() && p.epsilon > 0.0) {
            return invalid("policy needs k >= 1 and epsilon > 0".into());
        }
        match p.threshold {
            ThresholdConfig::Quantile(q) if !(q > 0.0 && q < 1.0) => {
                return invalid(format!("quantile {q} outside (0, 1)"));
            }
            ThresholdConfig::Tau(t) if t.is_nan() || t < 0.0 => {
                return invalid(format!("tau {t} must be >= 0"));
            }
            _ => {}
        }
        let s = &self.schedule;
        if s.patrol_samples <= p.k {
            return invalid(format!(
                "patrol_samples {} must exceed k = {}",
                s.patrol_samples, p.k
            ));
        }
        if !(0.5..=1.0).contains(&s.sample_interval) {
            return invalid(format!(
                "sample_interval {} m outside the 0.5-1.0 m patrol spacing",
                s.sample_interval
            ));
        }
        if s.mow_steps == 0 {
            return invalid("mow_steps must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    /// Metres per cell side.
    pub cell_size: f64,
    pub species_count: usize,
}

impl Default for GridConfig {
    /// 6 m x 4 m of 25 cm cells.
    fn default() -> Self {
        Self {
            width: 24,
            height: 16,
            cell_size: 0.25,
            species_count: 5,
        }
    }
}

/// Initial vegetation layout. Species 0 is grass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WorldConfig {
    /// Every cell holds a single species.
    Uniform { species: usize },
    /// Pure grass with isolated single-species flower cells.
    MockUp { flower_fraction: f64 },
    /// Grass-dominated background (grass share drawn from
    /// `[background_grass, 1]`) with randomly mixed diverse patches.
    Meadow {
        patch_fraction: f64,
        background_grass: f64,
    },
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig::Meadow {
            patch_fraction: 0.25,
            background_grass: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedderConfig {
    pub dim: usize,
    pub noise_scale: f64,
    pub drift_scale: f64,
    pub prototype_scale: f64,
    /// Explicit species prototypes; drawn from the seed when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prototypes: Option<Vec<Vec<f64>>>,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        Self {
            dim: 64,
            noise_scale: 0.1,
            drift_scale: 0.5,
            prototype_scale: 1.0,
            prototypes: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotConfig {
    /// Metres travelled per simulation step.
    pub step_length: f64,
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self { step_length: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdConfig {
    /// Calibrate `tau` as this quantile of the patrol densities.
    Quantile(f64),
    /// Fixed `tau`; `0` mows everything, `inf` nothing.
    Tau(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub k: usize,
    pub epsilon: f64,
    pub threshold: ThresholdConfig,
    /// Compare unit-normalised embeddings instead of raw ones.
    pub normalize: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            k: 10,
            epsilon: 1e-8,
            threshold: ThresholdConfig::Quantile(0.2),
            normalize: false,
        }
    }
}

/// One cycle = patrol + calibration, a mowing pass, then idle regrowth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    pub cycles: usize,
    pub patrol_samples: usize,
    /// Metres between patrol images.
    pub sample_interval: f64,
    pub mow_steps: usize,
    pub regrow_steps: u64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            cycles: 30,
            patrol_samples: 200,
            sample_interval: 0.5,
            mow_steps: 800,
            regrow_steps: 100,
        }
    }
}
