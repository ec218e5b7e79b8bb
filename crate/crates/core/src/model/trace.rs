use std::time::{Duration, Instant};

use super::metrics::{center_error, groupwise_rate_aligned, misclustering_rate};
use super::types::{CenterSet, LabelVector};

/// Ground truth used to score an iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub labels: LabelVector,
    pub centers: Option<CenterSet>,
}

impl Reference {
    pub fn labels(labels: LabelVector) -> Self {
        Self {
            labels,
            centers: None,
        }
    }

    pub fn with_centers(labels: LabelVector, centers: CenterSet) -> Self {
        Self {
            labels,
            centers: Some(centers),
        }
    }

    /// Score an estimate. Metrics that cannot be computed (shape mismatch,
    /// no true centers) are left as `None`.
    pub fn evaluate(
        &self,
        estimate: &LabelVector,
        centers: Option<&CenterSet>,
        objective: Option<f64>,
    ) -> ClusterMetrics {
        let Ok(alignment) = misclustering_rate(&self.labels, estimate) else {
            return ClusterMetrics {
                objective,
                ..ClusterMetrics::default()
            };
        };
        let groupwise = groupwise_rate_aligned(&self.labels, &alignment.apply(estimate))
            .ok()
            .map(|g| g.rate);
        let center_error = match (&self.centers, centers) {
            (Some(truth), Some(est)) => center_error(truth, est, &alignment.map).ok(),
            _ => None,
        };
        ClusterMetrics {
            misclustering: Some(alignment.rate),
            groupwise,
            center_error,
            objective,
        }
    }
}

/// Per-iterate error metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ClusterMetrics {
    /// Mis-clustering rate A_s.
    pub misclustering: Option<f64>,
    /// Group-wise rate G_s.
    pub groupwise: Option<f64>,
    /// Center error Λ_s (distance normalized by the minimum separation).
    pub center_error: Option<f64>,
    /// Objective minimized by the algorithm (k-means objective for Lloyd).
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Time since the fit started.
    pub elapsed: Duration,
    pub metrics: ClusterMetrics,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub entries: Vec<TraceEntry>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&TraceEntry> {
        self.entries.last()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.entries.iter().filter_map(|e| e.metrics.objective).collect()
    }

    pub fn misclustering(&self) -> Vec<Option<f64>> {
        self.entries.iter().map(|e| e.metrics.misclustering).collect()
    }

    /// True when no recorded objective exceeds its predecessor by more than
    /// `rel_tol` relative to the predecessor's magnitude.
    pub fn objective_is_non_increasing(&self, rel_tol: f64) -> bool {
        self.objectives()
            .windows(2)
            .all(|w| w[1] <= w[0] + rel_tol * w[0].abs().max(f64::MIN_POSITIVE))
    }
}

/// Builds a trace, timestamping entries against the fit's start.
pub(crate) struct Recorder<'a> {
    start: Instant,
    reference: Option<&'a Reference>,
    trace: ConvergenceTrace,
}

impl<'a> Recorder<'a> {
    pub fn new(reference: Option<&'a Reference>) -> Self {
        Self {
            start: Instant::now(),
            reference,
            trace: ConvergenceTrace::default(),
        }
    }

    pub fn record(
        &mut self,
        iteration: usize,
        labels: &LabelVector,
        centers: Option<&CenterSet>,
        objective: Option<f64>,
    ) {
        let metrics = match self.reference {
            Some(r) => r.evaluate(labels, centers, objective),
            None => ClusterMetrics {
                objective,
                ..ClusterMetrics::default()
            },
        };
        self.trace.entries.push(TraceEntry {
            iteration,
            elapsed: self.start.elapsed(),
            metrics,
        });
    }

    pub fn finish(self) -> ConvergenceTrace {
        self.trace
    }
}
