use serde::{Deserialize, Serialize};

use super::SimError;

/// Index of the grass species in every abundance vector.
pub const GRASS: usize = 0;

/// One patch of lawn.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Species proportions, nonnegative and summing to one.
    pub abundance: Vec<f64>,
    /// Vegetation height in cm.
    pub height: f64,
    pub last_mow_step: Option<u64>,
}

impl Cell {
    pub fn pure(species: usize, species_count: usize, height: f64) -> Self {
        let mut abundance = vec![0.0; species_count];
        abundance[species] = 1.0;
        Self {
            abundance,
            height,
            last_mow_step: None,
        }
    }

    pub fn grass_share(&self) -> f64 {
        self.abundance[GRASS]
    }
}

/// Shannon index `-sum p ln p` over the nonzero proportions.
pub fn shannon_index(cell: &Cell) -> f64 {
    -cell
        .abundance
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Mowing and regrowth rates. Heights in cm, rates per simulation step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dynamics {
    pub cut_height: f64,
    /// Fraction of the non-grass share converted to grass by one mowing.
    pub mow_pressure: f64,
    pub growth_rate: f64,
    pub max_height: f64,
    /// Per-step relaxation of each cell's mix toward an even species mix.
    pub diversification_rate: f64,
    pub initial_height: f64,
}

impl Default for Dynamics {
    fn default() -> Self {
        Self {
            cut_height: 4.0,
            mow_pressure: 0.1,
            growth_rate: 0.02,
            max_height: 30.0,
            diversification_rate: 0.001,
            initial_height: 8.0,
        }
    }
}

impl Dynamics {
    pub fn validate(&self) -> Result<(), SimError> {
        let nonneg = [
            ("cut_height", self.cut_height),
            ("growth_rate", self.growth_rate),
            ("max_height", self.max_height),
            ("initial_height", self.initial_height),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SimError::ConfigInvalid(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("mow_pressure", self.mow_pressure),
            ("diversification_rate", self.diversification_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SimError::ConfigInvalid(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Rectangular lawn of square cells, stored row-major (`index = y * width + x`).
#[derive(Debug, Clone, PartialEq)]
pub struct LawnGrid {
    width: usize,
    height: usize,
    cell_size: f64,
    species_count: usize,
    cells: Vec<Cell>,
}

impl LawnGrid {
    pub fn new(
        width: usize,
        height: usize,
        cell_size: f64,
        species_count: usize,
        mut fill: impl FnMut(usize, usize) -> Cell,
    ) -> Result<Self, SimError> {
        if width == 0 || height == 0 {
            return Err(SimError::ConfigInvalid(
                "grid dimensions must be positive".into(),
            ));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(SimError::ConfigInvalid(format!(
                "cell_size must be positive, got {cell_size}"
            )));
        }
        if species_count == 0 {
            return Err(SimError::ConfigInvalid(
                "species_count must be positive".into(),
            ));
        }
        let mut cells = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let cell = fill(x, y);
                if cell.abundance.len() != species_count {
                    return Err(SimError::ConfigInvalid(format!(
                        "cell ({x}, {y}) has {} species, expected {species_count}",
                        cell.abundance.len()
                    )));
                }
                let sum: f64 = cell.abundance.iter().sum();
                if cell.abundance.iter().any(|&p| p.is_nan() || p < 0.0) || (sum - 1.0).abs() > 1e-9
                {
                    return Err(SimError::ConfigInvalid(format!(
                        "cell ({x}, {y}) abundance is not a distribution"
                    )));
                }
                cells.push(cell);
            }
        }
        Ok(Self {
            width,
            height,
            cell_size,
            species_count,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn species_count(&self) -> usize {
        self.species_count
    }

    /// Lawn extent in metres, `(x, y)`.
    pub fn extent(&self) -> (f64, f64) {
        (
            self.width as f64 * self.cell_size,
            self.height as f64 * self.cell_size,
        )
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, index: usize) -> Result<&Cell, SimError> {
        self.cells.get(index).ok_or(SimError::IndexOutOfBounds {
            index,
            len: self.cells.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the cell containing the point, clamped onto the lawn.
    pub fn cell_at(&self, x: f64, y: f64) -> usize {
        let cx = ((x / self.cell_size).floor().max(0.0) as usize).min(self.width - 1);
        let cy = ((y / self.cell_size).floor().max(0.0) as usize).min(self.height - 1);
        cy * self.width + cx
    }

    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    pub fn mean_shannon(&self) -> f64 {
        self.cells.iter().map(shannon_index).sum::<f64>() / self.cells.len() as f64
    }

    pub fn mean_height(&self) -> f64 {
        self.cells.iter().map(|c| c.height).sum::<f64>() / self.cells.len() as f64
    }
}

/// Cuts a cell and shifts its mix toward grass:
/// `grass <- grass + pressure * (1 - grass)`, other species scaled by `1 - pressure`.
pub fn apply_mow(
    grid: &mut LawnGrid,
    cell_index: usize,
    step: u64,
    dynamics: &Dynamics,
) -> Result<(), SimError> {
    let len = grid.cells.len();
    let cell = grid
        .cells
        .get_mut(cell_index)
        .ok_or(SimError::IndexOutOfBounds {
            index: cell_index,
            len,
        })?;
    cell.height = cell.height.min(dynamics.cut_height);
    let m = dynamics.mow_pressure;
    if m > 0.0 {
        let keep = 1.0 - m;
        for (s, p) in cell.abundance.iter_mut().enumerate() {
            if s == GRASS {
                *p += m * (1.0 - *p);
            } else {
                *p *= keep;
            }
        }
    }
    cell.last_mow_step = Some(step);
    Ok(())
}

/// Advances every cell by `steps`: linear height growth up to the cap, and
/// geometric relaxation of the species mix toward an even mix,
/// `p <- u + (1 - r)^steps (p - u)`.
pub fn regrow(grid: &mut LawnGrid, steps: u64, dynamics: &Dynamics) {
    if steps == 0 {
        return;
    }
    let target = 1.0 / grid.species_count as f64;
    let r = dynamics.diversification_rate;
    let retain = if r > 0.0 {
        Some((1.0 - r).powf(steps as f64))
    } else {
        None
    };
    let growth = dynamics.growth_rate * steps as f64;
    for cell in grid.cells.iter_mut() {
        if cell.height < dynamics.max_height {
            cell.height = (cell.height + growth).min(dynamics.max_height);
        }
        if let Some(f) = retain {
            for p in cell.abundance.iter_mut() {
                *p = (target + f * (*p - target)).max(0.0);
            }
        }
    }
}
