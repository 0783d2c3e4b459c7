use rand::Rng;
use rand_distr::StandardNormal;

use super::{LawnGrid, RobotState, SimError};
use crate::Embedding64;

/// Stand-in for the camera + CNN: a cell's embedding is the abundance-weighted
/// mix of per-species prototype vectors, shifted by a fixed context offset
/// (lighting, soil) and perturbed by isotropic Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticEmbedder {
    prototypes: Vec<Vec<f64>>,
    noise_scale: f64,
    context_drift: Vec<f64>,
}

impl SyntheticEmbedder {
    pub fn new(
        prototypes: Vec<Vec<f64>>,
        noise_scale: f64,
        context_drift: Vec<f64>,
    ) -> Result<Self, SimError> {
        let dim = prototypes.first().map(Vec::len).unwrap_or(0);
        if dim == 0 {
            return Err(SimError::ConfigInvalid(
                "need at least one prototype of positive dimension".into(),
            ));
        }
        if prototypes.iter().any(|p| p.len() != dim) || context_drift.len() != dim {
            return Err(SimError::ConfigInvalid(
                "prototype / drift dimensions differ".into(),
            ));
        }
        if prototypes
            .iter()
            .flatten()
            .chain(&context_drift)
            .any(|v| !v.is_finite())
        {
            return Err(SimError::ConfigInvalid(
                "prototypes and drift must be finite".into(),
            ));
        }
        for i in 0..prototypes.len() {
            for j in (i + 1)..prototypes.len() {
                if prototypes[i] == prototypes[j] {
                    return Err(SimError::ConfigInvalid(format!(
                        "species prototypes {i} and {j} coincide"
                    )));
                }
            }
        }
        if !(noise_scale.is_finite() && noise_scale >= 0.0) {
            return Err(SimError::ConfigInvalid(format!(
                "noise_scale must be >= 0, got {noise_scale}"
            )));
        }
        Ok(Self {
            prototypes,
            noise_scale,
            context_drift,
        })
    }

    /// Gaussian prototypes with per-component scale `prototype_scale` and a
    /// Gaussian context offset with scale `drift_scale`.
    pub fn random<R: Rng + ?Sized>(
        species_count: usize,
        dim: usize,
        prototype_scale: f64,
        noise_scale: f64,
        drift_scale: f64,
        rng: &mut R,
    ) -> Result<Self, SimError> {
        let mut gaussian = |scale: f64| -> Vec<f64> {
            (0..dim)
                .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
                .collect()
        };
        let prototypes = (0..species_count)
            .map(|_| gaussian(prototype_scale))
            .collect();
        let drift = gaussian(drift_scale);
        Self::new(prototypes, noise_scale, drift)
    }

    pub fn dim(&self) -> usize {
        self.context_drift.len()
    }

    pub fn species_count(&self) -> usize {
        self.prototypes.len()
    }

    pub fn prototypes(&self) -> &[Vec<f64>] {
        &self.prototypes
    }

    /// Noise-free appearance of an abundance mix.
    pub fn appearance(&self, abundance: &[f64]) -> Vec<f64> {
        let mut out = self.context_drift.clone();
        for (p, proto) in abundance.iter().zip(&self.prototypes) {
            if *p != 0.0 {
                out.iter_mut().zip(proto).for_each(|(o, &v)| *o += p * v);
            }
        }
        out
    }

    /// Embeds one abundance mix, drawing exactly `dim` normals when noise is on.
    pub fn embed<R: Rng + ?Sized>(&self, abundance: &[f64], rng: &mut R) -> Embedding64 {
        let mut values = self.appearance(abundance);
        if self.noise_scale > 0.0 {
            for v in values.iter_mut() {
                *v += self.noise_scale * rng.sample::<f64, _>(StandardNormal);
            }
        }
        Embedding64::new(values).expect("finite prototypes and noise")
    }
}

/// Embedding of the cell in front of the robot.
pub fn sense<R: Rng + ?Sized>(
    grid: &LawnGrid,
    state: &RobotState,
    embedder: &SyntheticEmbedder,
    rng: &mut R,
) -> Embedding64 {
    let cell = &grid.cells()[state.sensed_cell(grid)];
    embedder.embed(&cell.abundance, rng)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::lawnsim::Cell;

    fn protos() -> Vec<Vec<f64>> {
        vec![
            vec![1.0, 0.0, 2.0],
            vec![-1.0, 4.0, 0.0],
            vec![0.0, 0.0, -3.0],
        ]
    }

    #[test]
    fn pure_cell_gives_its_prototype() {
        let emb = SyntheticEmbedder::new(protos(), 0.0, vec![0.0; 3]).unwrap();
        let g = LawnGrid::new(4, 4, 0.25, 3, |_, _| Cell::pure(1, 3, 5.0)).unwrap();
        let r = RobotState::new(0.5, 0.5, 0.0, 0.25, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            sense(&g, &r, &emb, &mut rng).as_slice(),
            protos()[1].as_slice()
        );
    }

    #[test]
    fn half_half_cell_gives_midpoint() {
        let emb = SyntheticEmbedder::new(protos(), 0.0, vec![0.0; 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e = emb.embed(&[0.5, 0.0, 0.5], &mut rng);
        assert_eq!(e.as_slice(), &[0.5, 0.0, -0.5]);
    }

    #[test]
    fn senses_the_cell_ahead() {
        let emb = SyntheticEmbedder::new(protos(), 0.0, vec![10.0, 0.0, 0.0]).unwrap();
        // column 2 is species 2, everything else species 0
        let g = LawnGrid::new(4, 1, 0.25, 3, |x, _| {
            Cell::pure(if x == 2 { 2 } else { 0 }, 3, 5.0)
        })
        .unwrap();
        let r = RobotState::new(0.3, 0.1, 0.0, 0.25, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sense(&g, &r, &emb, &mut rng).as_slice(), &[10.0, 0.0, -3.0]);
    }

    #[test]
    fn noisy_sensing_replays() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let emb = SyntheticEmbedder::random(5, 16, 1.0, 0.2, 0.3, &mut rng).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| emb.embed(&[0.2; 5], &mut rng))
                .flat_map(|e| e.into_vec())
                .map(f64::to_bits)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn rejects_duplicate_prototypes() {
        let mut p = protos();
        p[2] = p[0].clone();
        assert!(SyntheticEmbedder::new(p, 0.0, vec![0.0; 3]).is_err());
        assert!(SyntheticEmbedder::new(protos(), -1.0, vec![0.0; 3]).is_err());
        assert!(SyntheticEmbedder::new(protos(), 0.0, vec![0.0; 2]).is_err());
    }
}
