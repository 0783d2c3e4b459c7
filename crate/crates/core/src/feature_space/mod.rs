//! Core numerical types and kernels over embedding space.

mod dispersion;
mod embedding;
mod knn;
mod pca;
mod store;

pub use dispersion::{centroid, global_deviation};
pub use embedding::Embedding;
pub use knn::{
    knn_density, knn_query, nearest_neighbors, DensityParams, Metric, Neighbor, NeighborSet,
};
pub use pca::{pca_project, Projection};
pub use store::{EmbeddingStore, SequenceId, StoreEntry};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("need {required} eligible points, only {available} available")]
    InsufficientPoints { required: usize, available: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("non-finite value at component {index}")]
    NonFiniteValue { index: usize },
    #[error("rank deficient: {distinct} distinct points cannot span {requested} directions")]
    RankDeficient { distinct: usize, requested: usize },
    #[error("store is full (capacity {capacity})")]
    StoreFull { capacity: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
