//! Mow/spare decisions over a patrolled embedding store.
//!
//! A frame is scored with the kNN density against the current store. Dense
//! (visually common) frames exceed the threshold and may be mown; sparse ones
//! are spared. The frame then replaces the oldest stored embedding so the
//! store follows the lawn as it changes.

use std::fmt;

use thiserror::Error;

use crate::feature_space::{
    knn_density, DensityParams, Embedding, EmbeddingStore, FeatureError, SequenceId,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("empty input")]
    EmptyInput,
    #[error("quantile {0} outside the open interval (0, 1)")]
    QuantileOutOfRange(f64),
    #[error("density {value} at index {index} is not a positive finite number")]
    InvalidDensity { index: usize, value: f64 },
    #[error("threshold {0} must be a non-negative number")]
    InvalidThreshold(f64),
    #[error("store holds {len} of {capacity} entries; finish the patrol before mowing")]
    StoreNotFull { len: usize, capacity: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Mow,
    Spare,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Mow => "Mow",
            Verdict::Spare => "Spare",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdProvenance<T> {
    Manual,
    QuantileCalibrated { q: T },
}

/// Density cutoff: frames strictly denser than `tau` are mowable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold<T> {
    tau: T,
    provenance: ThresholdProvenance<T>,
}

impl<T: Scalar> Threshold<T> {
    pub const DEFAULT_QUANTILE: f64 = 0.2;

    /// A hand-set threshold. `0` mows everything, `+inf` spares everything.
    pub fn manual(tau: T) -> Result<Self, PolicyError> {
        if tau.is_nan() || tau < T::zero() {
            return Err(PolicyError::InvalidThreshold(
                tau.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(Self {
            tau,
            provenance: ThresholdProvenance::Manual,
        })
    }

    pub fn never_mow() -> Self {
        Self::manual(T::infinity()).expect("infinity is a valid threshold")
    }

    pub fn always_mow() -> Self {
        Self::manual(T::zero()).expect("zero is a valid threshold")
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn provenance(&self) -> ThresholdProvenance<T> {
        self.provenance
    }
}

/// One processed frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRecord<T> {
    pub frame_id: u64,
    pub density: T,
    pub tau: T,
    pub verdict: Verdict,
    /// Store revision after this frame's update.
    pub store_revision: u64,
}

/// Sets `tau` to the empirical `q`-quantile of the patrol densities, linearly
/// interpolated between order statistics.
pub fn calibrate_threshold<T: Scalar>(
    patrol_densities: &[T],
    q: T,
) -> Result<Threshold<T>, PolicyError> {
    if patrol_densities.is_empty() {
        return Err(PolicyError::EmptyInput);
    }
    if !(q > T::zero() && q < T::one()) {
        return Err(PolicyError::QuantileOutOfRange(
            q.to_f64().unwrap_or(f64::NAN),
        ));
    }
    if let Some((index, v)) = patrol_densities
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v > T::zero()))
    {
        return Err(PolicyError::InvalidDensity {
            index,
            value: v.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut values = patrol_densities.to_vec();
    let position = T::from_count(values.len() - 1) * q;
    let lower = position.floor();
    let frac = position - lower;
    let lo = lower.to_usize().expect("position within slice");
    let by_value = |a: &T, b: &T| a.partial_cmp(b).expect("finite densities");
    let (_, &mut low_value, upper) = values.select_nth_unstable_by(lo, by_value);
    let tau = match upper.iter().copied().min_by(by_value) {
        Some(high_value) if frac > T::zero() => low_value + frac * (high_value - low_value),
        _ => low_value,
    };
    Ok(Threshold {
        tau,
        provenance: ThresholdProvenance::QuantileCalibrated { q },
    })
}

/// `Mow` iff `density > tau`; a density equal to the threshold is spared.
#[inline]
pub fn decide<T: Scalar>(density: T, threshold: &Threshold<T>) -> Verdict {
    if density > threshold.tau {
        Verdict::Mow
    } else {
        Verdict::Spare
    }
}

/// Replaces the oldest stored embedding with `new_embedding`, returning the
/// evicted id. The store must already be full.
pub fn update_store<T: Scalar>(
    store: &mut EmbeddingStore<T>,
    new_embedding: Embedding<T>,
) -> Result<SequenceId, PolicyError> {
    new_embedding.check_dim(store.dim())?;
    if !store.is_full() {
        return Err(PolicyError::StoreNotFull {
            len: store.len(),
            capacity: store.capacity(),
        });
    }
    Ok(store.replace_oldest(new_embedding)?)
}

/// One mowing step: score the frame against the current store, decide, then
/// push the frame into the store.
///
/// The decision always uses the store as it was before this frame's update.
/// `frame_id` is the number of frames processed since the patrol. On error the
/// store is unchanged.
pub fn process_frame<T: Scalar>(
    store: &mut EmbeddingStore<T>,
    frame: Embedding<T>,
    params: &DensityParams<T>,
    threshold: &Threshold<T>,
) -> Result<DecisionRecord<T>, PolicyError> {
    frame.check_dim(store.dim())?;
    if !store.is_full() {
        return Err(PolicyError::StoreNotFull {
            len: store.len(),
            capacity: store.capacity(),
        });
    }
    let frame_id = store.revision();
    let density = knn_density(store, &frame, params, None)?;
    let verdict = decide(density, threshold);
    update_store(store, frame)?;
    Ok(DecisionRecord {
        frame_id,
        density,
        tau: threshold.tau,
        verdict,
        store_revision: store.revision(),
    })
}

/// Densities of every stored point against the rest of the store.
pub fn self_excluded_densities<T: Scalar>(
    store: &EmbeddingStore<T>,
    params: &DensityParams<T>,
) -> Result<Vec<T>, PolicyError> {
    store
        .entries()
        .map(|e| knn_density(store, &e.embedding, params, Some(e.id)).map_err(Into::into))
        .collect()
}
