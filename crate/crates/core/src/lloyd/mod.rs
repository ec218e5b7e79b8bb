//! Lloyd's algorithm: alternate nearest-center label assignment with
//! cluster-mean center updates.

mod init;
mod symmetric;

use ndarray::Array2;

use crate::error::{ClusterError, Result};
use crate::model::{
    kmeans_objective, CenterSet, ConvergenceTrace, DataMatrix, LabelVector, Reference,
};
use crate::model::trace::Recorder;
use crate::model::types::squared_distance;

pub use init::{corrupt_cyclic, flip_fraction, random_labels};
pub use symmetric::{
    fit_symmetric_two, labels_to_signs, random_init_search, restart_count, signs_to_labels,
    RandomSearch, SymmetricFit, SymmetricInit,
};

/// What happens to a cluster that receives no points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EmptyClusterPolicy {
    /// The cluster keeps the center it had in the previous iteration.
    #[default]
    KeepPrevious,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydConfig {
    /// Iteration budget. `None` means `ceil(4 ln n)` for general fits and
    /// `ceil(3 ln n)` for the symmetric two-mixture fit.
    pub max_iter: Option<usize>,
    /// Stop as soon as an iteration leaves the labels unchanged. Disable to
    /// run the full budget (fixed-length traces).
    pub early_stop: bool,
    pub empty_cluster_policy: EmptyClusterPolicy,
    pub seed: u64,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            max_iter: None,
            early_stop: true,
            empty_cluster_policy: EmptyClusterPolicy::KeepPrevious,
            seed: 0,
        }
    }
}

impl LloydConfig {
    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = Some(max_iter);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn full_budget(mut self) -> Self {
        self.early_stop = false;
        self
    }

    pub(crate) fn budget(&self, n: usize, log_factor: f64) -> Result<usize> {
        match self.max_iter {
            Some(0) => Err(ClusterError::InvalidParameter("max_iter must be at least 1".into())),
            Some(m) => Ok(m),
            None => Ok(log_budget(n, log_factor)),
        }
    }
}

/// `ceil(factor * ln n)`, at least 1.
pub fn log_budget(n: usize, factor: f64) -> usize {
    ((factor * (n as f64).ln()).ceil() as usize).max(1)
}

/// Starting point of a fit.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Labels(LabelVector),
    Centers(CenterSet),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub labels: LabelVector,
    pub centers: CenterSet,
    /// Entry 0 is the initializer; entry s is the state after iteration s.
    pub trace: ConvergenceTrace,
    pub iterations_run: usize,
    pub converged: bool,
}

/// Cluster means. An empty cluster keeps its row of `prev_centers`.
pub fn center_update(
    data: &DataMatrix,
    labels: &LabelVector,
    prev_centers: &CenterSet,
) -> Result<CenterSet> {
    if prev_centers.k() != labels.k() {
        return Err(ClusterError::ClusterCountMismatch {
            left: labels.k(),
            right: prev_centers.k(),
        });
    }
    if prev_centers.d() != data.d() {
        return Err(ClusterError::DimensionMismatch {
            expected: data.d(),
            got: prev_centers.d(),
        });
    }
    let (sums, counts) = cluster_sums(data, labels)?;
    Ok(finish_means(sums, &counts, Some(prev_centers)))
}

/// Cluster means with no fallback; fails if a cluster is empty.
pub(crate) fn initial_centers(data: &DataMatrix, labels: &LabelVector) -> Result<CenterSet> {
    let (sums, counts) = cluster_sums(data, labels)?;
    if let Some(h) = counts.iter().position(|&c| c == 0) {
        return Err(ClusterError::InvalidInit(format!(
            "cluster {h} of the initial labels is empty and has no previous center"
        )));
    }
    Ok(finish_means(sums, &counts, None))
}

fn cluster_sums(data: &DataMatrix, labels: &LabelVector) -> Result<(Array2<f64>, Vec<usize>)> {
    if labels.len() != data.n() {
        return Err(ClusterError::LengthMismatch {
            expected: data.n(),
            got: labels.len(),
        });
    }
    let mut sums = Array2::<f64>::zeros((labels.k(), data.d()));
    let mut counts = vec![0usize; labels.k()];
    for (i, &h) in labels.as_slice().iter().enumerate() {
        let mut row = sums.row_mut(h);
        row += &data.row(i);
        counts[h] += 1;
    }
    Ok((sums, counts))
}

fn finish_means(mut sums: Array2<f64>, counts: &[usize], prev: Option<&CenterSet>) -> CenterSet {
    for (h, &c) in counts.iter().enumerate() {
        if c > 0 {
            sums.row_mut(h).mapv_inplace(|v| v / c as f64);
        } else if let Some(prev) = prev {
            sums.row_mut(h).assign(&prev.center(h));
        }
    }
    CenterSet::from_array_unchecked(sums)
}

/// Nearest center in Euclidean distance; ties go to the smallest index.
pub fn label_update(data: &DataMatrix, centers: &CenterSet) -> Result<LabelVector> {
    if data.d() != centers.d() {
        return Err(ClusterError::DimensionMismatch {
            expected: centers.d(),
            got: data.d(),
        });
    }
    let labels = (0..data.n())
        .map(|i| nearest_center(data, i, centers))
        .collect();
    Ok(LabelVector::from_vec_unchecked(labels, centers.k()))
}

fn nearest_center(data: &DataMatrix, i: usize, centers: &CenterSet) -> usize {
    let y = data.row(i);
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for h in 0..centers.k() {
        let dist = squared_distance(y, centers.center(h));
        if dist < best_dist {
            best = h;
            best_dist = dist;
        }
    }
    best
}

/// Run Lloyd's algorithm from `init`.
///
/// A label initializer is turned into centers by a center update (every
/// initial cluster must be non-empty); a center initializer is turned into
/// labels by a label update. Each iteration then assigns labels to the
/// nearest current center and recomputes the means. When `reference` is
/// given the trace carries A_s, G_s and (with true centers) Λ_s.
pub fn fit_lloyd(
    data: &DataMatrix,
    k: usize,
    init: &Init,
    config: &LloydConfig,
    reference: Option<&Reference>,
) -> Result<FitResult> {
    if k == 0 {
        return Err(ClusterError::InvalidParameter("k must be at least 1".into()));
    }
    if k > data.n() {
        return Err(ClusterError::TooManyClusters { k, n: data.n() });
    }
    let max_iter = config.budget(data.n(), 4.0)?;

    let (mut labels, mut centers) = match init {
        Init::Labels(z) => {
            if z.k() != k || z.len() != data.n() {
                return Err(ClusterError::InvalidInit(format!(
                    "expected {} labels over k = {k}, got {} over k = {}",
                    data.n(),
                    z.len(),
                    z.k()
                )));
            }
            (z.clone(), initial_centers(data, z)?)
        }
        Init::Centers(c) => {
            if c.k() != k || c.d() != data.d() {
                return Err(ClusterError::InvalidInit(format!(
                    "expected {k}x{} centers, got {}x{}",
                    data.d(),
                    c.k(),
                    c.d()
                )));
            }
            let z = label_update(data, c)?;
            let theta = center_update(data, &z, c)?;
            (z, theta)
        }
    };

    let mut recorder = Recorder::new(reference);
    recorder.record(0, &labels, Some(&centers), Some(kmeans_objective(data, &centers)?));

    let mut converged = false;
    let mut iterations_run = 0;
    for s in 1..=max_iter {
        let next_labels = label_update(data, &centers)?;
        let next_centers = center_update(data, &next_labels, &centers)?;
        let unchanged = next_labels == labels;
        labels = next_labels;
        centers = next_centers;
        iterations_run = s;
        recorder.record(s, &labels, Some(&centers), Some(kmeans_objective(data, &centers)?));
        if unchanged {
            converged = true;
            if config.early_stop {
                break;
            }
        }
    }

    Ok(FitResult {
        labels,
        centers,
        trace: recorder.finish(),
        iterations_run,
        converged,
    })
}
