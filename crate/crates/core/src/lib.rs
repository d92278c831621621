//! Sparse k-means clustering for high-dimensional data.
//!
//! Two sparse variants share one alternating scheme: cluster under
//! feature-weighted squared Euclidean dissimilarity, then choose feature
//! weights that maximize the weighted between-cluster sum of squares.
//!
//! * [`sparse::l0_kmeans`] keeps binary weights on the `⌊s⌋` features with
//!   the largest between-cluster sum of squares (hard thresholding).
//! * [`sparse::l1_kmeans`] uses normalized soft thresholding under
//!   `‖w‖₂ ≤ 1, ‖w‖₁ ≤ s`.
//!
//! Around them sit a weighted k-means engine ([`kmeans`]), a permutation
//! gap statistic for choosing `s` ([`gap`]), Gaussian-mixture benchmark
//! generators ([`synth`]), evaluation criteria ([`metrics`]), a Monte Carlo
//! harness for consistency checks ([`lab`]) and the benchmark protocol
//! ([`experiment`]). The `sparsekm` binary exposes all of it on the command
//! line ([`cli`]).

pub mod cli;
pub mod data;
pub mod error;
pub mod experiment;
pub mod gap;
pub mod kmeans;
pub mod lab;
pub mod metrics;
pub mod rng;
pub mod sparse;
pub mod synth;

pub use data::{
    bcss_centered_sums, bcss_per_feature, total_ss, weighted_wcss, BcssVector, DataMatrix,
    FeatureWeights, Partition, WeightRegime,
};
pub use error::{Error, Result};
pub use kmeans::{kmeans_pp_init, lloyd_weighted, run_kmeans, KmeansConfig, KmeansResult};
pub use sparse::{
    l0_kmeans, l0_weight_update, l1_kmeans, l1_weight_update, sparse_kmeans, SparseKmeansConfig,
    SparseKmeansResult, SparseMethod,
};
