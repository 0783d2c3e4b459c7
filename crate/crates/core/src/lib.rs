//! Biodiversity-aware mowing decisions driven by k-nearest-neighbour density
//! in a deep-feature embedding space.
//!
//! The crate is organised bottom-up:
//!
//! * [`feature_space`] — embeddings, the fixed-capacity store, exact kNN
//!   search, kNN density, centroid / global deviation and a PCA projection.
//! * [`policy`] — threshold calibration, mow/spare verdicts and the FIFO store
//!   update that closes the perception/action loop.
//! * [`lawnsim`] — a deterministic lawn simulator used to exercise the policy.
//! * [`store_io`] — the on-disk embedding format, dataset manifests and
//!   decision logs.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). Simulator and
//! I/O code works in `f64`; the aliases below name the usual instantiations.

pub mod feature_space;
pub mod lawnsim;
pub mod policy;
pub mod scalar;
pub mod store_io;

pub use feature_space::{
    centroid, global_deviation, knn_density, knn_query, pca_project, DensityParams, Embedding,
    EmbeddingStore, FeatureError, Metric, Neighbor, NeighborSet, SequenceId,
};
pub use policy::{
    calibrate_threshold, decide, process_frame, update_store, DecisionRecord, PolicyError,
    Threshold, ThresholdProvenance, Verdict,
};
pub use scalar::Scalar;

pub type Embedding64 = Embedding<f64>;
pub type Embedding32 = Embedding<f32>;
pub type Store64 = EmbeddingStore<f64>;
pub type Store32 = EmbeddingStore<f32>;
pub type DensityParams64 = DensityParams<f64>;
pub type DensityParams32 = DensityParams<f32>;
pub type Threshold64 = Threshold<f64>;
pub type Threshold32 = Threshold<f32>;
pub type DecisionRecord64 = DecisionRecord<f64>;
pub type NeighborSet64 = NeighborSet<f64>;
