//! Lloyd's algorithm for clustering sub-Gaussian mixtures, plus two variants
//! built on the same alternating scheme:
//!
//! * [`commu`]: community detection in stochastic block models (degree
//!   trimming, spectral initialization, per-node connection-frequency updates).
//! * [`crowd`]: label aggregation under the Dawid-Skene crowdsourcing model
//!   (majority-vote initialization, confusion-matrix and least-squares label
//!   updates, missing-data aware).
//!
//! The [`model`] module holds the shared domain types and every error metric
//! (mis-clustering rate, group-wise rate, center error, signal-to-noise
//! quantities). [`samplers`] generates seeded synthetic data for all models.
//! All randomness flows through [`rng::stream`], so results depend only on
//! the master seed and never on scheduling.

pub mod assignment;
pub mod commu;
pub mod crowd;
pub mod error;
pub mod graph;
pub mod lloyd;
pub mod model;
pub mod rng;
pub mod samplers;
pub mod spectral;

pub use error::{ClusterError, Result};
pub use model::{CenterSet, ClusterMetrics, ConvergenceTrace, DataMatrix, LabelVector};
