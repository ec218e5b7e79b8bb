//! Community detection in stochastic block models by Lloyd-style
//! iterations on the adjacency matrix.
//!
//! The graph is first trimmed of unusually high-degree nodes and clustered
//! spectrally. Each iteration then estimates, for every node, the fraction
//! of each community it links to and moves it to the community it links to
//! most densely.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{ClusterError, Result};
use crate::graph::{AdjacencyMatrix, BinaryMatrix};
use crate::lloyd::log_budget;
use crate::model::trace::Recorder;
use crate::model::{ConvergenceTrace, LabelVector, Reference};
use crate::spectral::{spectral_cluster_operator, SpectralOptions};

/// How the trimming threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// Nodes with degree above this value are trimmed.
    Absolute(f64),
    /// Threshold is this multiple of the mean degree.
    Relative(f64),
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Relative(2.0)
    }
}

impl Threshold {
    pub fn resolve(&self, graph: &AdjacencyMatrix) -> Result<f64> {
        match *self {
            Threshold::Absolute(tau) if tau > 0.0 => Ok(tau),
            Threshold::Relative(mult) if mult > 0.0 => {
                let mean = 2.0 * graph.edge_count() as f64 / graph.n() as f64;
                Ok(mult * mean)
            }
            other => Err(ClusterError::InvalidParameter(format!(
                "trimming threshold must be positive: {other:?}"
            ))),
        }
    }
}

/// Whether trimming zeroes only the rows of heavy nodes or their rows and
/// columns.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TrimStyle {
    #[default]
    Symmetric,
    RowOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommuConfig {
    pub threshold: Threshold,
    pub trim_style: TrimStyle,
    /// `None` means `ceil(4 ln n)`.
    pub max_iter: Option<usize>,
    pub early_stop: bool,
    pub spectral: SpectralOptions,
}

impl Default for CommuConfig {
    fn default() -> Self {
        Self {
            threshold: Threshold::default(),
            trim_style: TrimStyle::default(),
            max_iter: None,
            early_stop: true,
            spectral: SpectralOptions {
                require_convergence: false,
                ..SpectralOptions::default()
            },
        }
    }
}

impl CommuConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.spectral = self.spectral.with_seed(seed);
        self
    }
}

/// Remove every edge touching a node of degree above `tau`.
pub fn trim_adjacency(graph: &AdjacencyMatrix, tau: f64) -> AdjacencyMatrix {
    let heavy: Vec<bool> = graph.degrees().iter().map(|&d| d as f64 > tau).collect();
    let rows = (0..graph.n())
        .map(|i| {
            if heavy[i] {
                Vec::new()
            } else {
                graph
                    .neighbors(i)
                    .iter()
                    .map(|&j| j as usize)
                    .filter(|&j| !heavy[j])
                    .collect()
            }
        })
        .collect();
    let matrix = BinaryMatrix::from_rows(graph.n(), rows).expect("subset of valid rows");
    AdjacencyMatrix::from_symmetric(matrix).expect("trimming preserves symmetry")
}

/// Zero the rows of nodes with degree above `tau`, keeping their columns.
/// The result is generally not symmetric.
pub fn trim_rows(graph: &AdjacencyMatrix, tau: f64) -> BinaryMatrix {
    let rows = (0..graph.n())
        .map(|i| {
            if graph.degree(i) as f64 > tau {
                Vec::new()
            } else {
                graph.neighbors(i).iter().map(|&j| j as usize).collect()
            }
        })
        .collect();
    BinaryMatrix::from_rows(graph.n(), rows).expect("subset of valid rows")
}

/// Per-node connection frequencies: entry (i, h) is the number of i's
/// neighbours in community h divided by the size of community h.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockProbMatrix {
    pub values: Array2<f64>,
    /// Communities that were empty; their columns carry over the previous
    /// estimate (or zeros when there was none).
    pub frozen: Vec<usize>,
}

pub fn commu_b_update(
    graph: &AdjacencyMatrix,
    labels: &LabelVector,
    previous: Option<&BlockProbMatrix>,
) -> Result<BlockProbMatrix> {
    let (n, k) = (graph.n(), labels.k());
    if labels.len() != n {
        return Err(ClusterError::LengthMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    if let Some(prev) = previous {
        if prev.values.dim() != (n, k) {
            return Err(ClusterError::DimensionMismatch {
                expected: n * k,
                got: prev.values.len(),
            });
        }
    }
    let sizes = labels.sizes();
    let z = labels.as_slice();
    let rows: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut counts = vec![0usize; k];
            for &j in graph.neighbors(i) {
                counts[z[j as usize]] += 1;
            }
            counts
        })
        .collect();
    let frozen: Vec<usize> = (0..k).filter(|&h| sizes[h] == 0).collect();
    let mut values = Array2::zeros((n, k));
    for (i, counts) in rows.iter().enumerate() {
        for h in 0..k {
            values[(i, h)] = if sizes[h] > 0 {
                counts[h] as f64 / sizes[h] as f64
            } else {
                previous.map_or(0.0, |p| p.values[(i, h)])
            };
        }
    }
    Ok(BlockProbMatrix { values, frozen })
}

/// Row-wise argmax, ties to the smallest community.
pub fn commu_label_update(b: &BlockProbMatrix) -> Result<LabelVector> {
    let (_, k) = b.values.dim();
    if k == 0 {
        return Err(ClusterError::InvalidParameter("no communities".into()));
    }
    let labels = b
        .values
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for h in 1..k {
                if row[h] > row[best] {
                    best = h;
                }
            }
            best
        })
        .collect();
    Ok(LabelVector::from_vec_unchecked(labels, k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommuFit {
    pub labels: LabelVector,
    pub block_probs: BlockProbMatrix,
    pub spectral_labels: LabelVector,
    /// Entry 0 is the spectral initializer.
    pub trace: ConvergenceTrace,
    pub tau: f64,
    pub iterations_run: usize,
    pub converged: bool,
}

/// Trim, cluster the trimmed matrix spectrally, then iterate the
/// connection-frequency and argmax updates on the untrimmed graph.
pub fn fit_commu_lloyd(
    graph: &AdjacencyMatrix,
    k: usize,
    config: &CommuConfig,
    reference: Option<&Reference>,
) -> Result<CommuFit> {
    let n = graph.n();
    if k == 0 {
        return Err(ClusterError::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(ClusterError::TooManyClusters { k, n });
    }
    let max_iter = match config.max_iter {
        Some(0) => return Err(ClusterError::InvalidParameter("max_iter must be at least 1".into())),
        Some(m) => m,
        None => log_budget(n, 4.0),
    };
    let tau = config.threshold.resolve(graph)?;
    let spectral = match config.trim_style {
        TrimStyle::Symmetric => spectral_cluster_operator(&trim_adjacency(graph, tau), k, &config.spectral)?,
        TrimStyle::RowOnly => spectral_cluster_operator(&trim_rows(graph, tau), k, &config.spectral)?,
    };
    let found = spectral.labels.sizes().iter().filter(|&&s| s > 0).count();
    if found < k {
        return Err(ClusterError::EmptyClusters { k, found });
    }

    let mut recorder = Recorder::new(reference);
    let mut labels = spectral.labels.clone();
    recorder.record(0, &labels, None, None);
    let mut block_probs = commu_b_update(graph, &labels, None)?;
    let mut converged = false;
    let mut iterations_run = 0;
    for s in 1..=max_iter {
        let next = commu_label_update(&block_probs)?;
        let unchanged = next == labels;
        labels = next;
        block_probs = commu_b_update(graph, &labels, Some(&block_probs))?;
        iterations_run = s;
        recorder.record(s, &labels, None, None);
        if unchanged {
            converged = true;
            if config.early_stop {
                break;
            }
        }
    }
    Ok(CommuFit {
        labels,
        block_probs,
        spectral_labels: spectral.labels,
        trace: recorder.finish(),
        tau,
        iterations_run,
        converged,
    })
}
