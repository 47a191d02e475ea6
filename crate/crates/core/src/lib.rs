//! Robust-loss clustering of Gaussian mixtures with outliers.
//!
//! [`scrlm::fit`] picks cluster centers from a random subsample by
//! repeatedly taking the point of smallest truncated-quadratic loss and
//! removing its neighborhood, then labels every observation with its
//! nearest center inside the loss support or `-1`.

pub mod baselines;
pub mod bounds;
pub mod distance;
pub mod error;
pub mod harness;
pub mod loss;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod scrlm;
pub mod synthgen;

pub use baselines::{kmeans_pp, kmeanspp_init, lloyd, scrlm_kmeans, KmeansParams, KmeansResult};
pub use bounds::{assumption1_holds, corollary7_thresholds, theorem1_probability, BoundReport};
pub use error::{Error, Result};
pub use loss::{per_observation_loss, support_radius, total_loss};
pub use metrics::{accuracy, hungarian_assign, purity, Assignment, ConfusionMatrix};
pub use model::{ClusterModel, DataMatrix, LabelVector, ScrlmParams, DEFAULT_F, OUTLIER};
pub use scrlm::{fit, ScrlmResult};
pub use synthgen::{sample, GmmConfig, LabeledDataset};
