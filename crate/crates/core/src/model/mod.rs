//! Domain types shared by all algorithms, and the clustering error metrics.

pub(crate) mod metrics;
mod snr;
pub(crate) mod trace;
pub(crate) mod types;

pub use metrics::{
    center_error, confusion_counts, groupwise_rate, kmeans_objective, misclustering_rate,
    misclustering_rate_bijective, Alignment, Groupwise,
};
pub use snr::{snr_report, MixtureDescription, SnrReport};
pub use trace::{ClusterMetrics, ConvergenceTrace, Reference, TraceEntry};
pub use types::{CenterSet, DataMatrix, LabelVector};
