//! Spectral clustering: project onto the top-k right singular subspace, then
//! approximately solve k-means on the projected rows.

mod svd;

use ndarray::{Array2, Axis};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{ClusterError, Result};
use crate::lloyd::{fit_lloyd, FitResult, Init, LloydConfig};
use crate::model::types::squared_distance;
use crate::model::{CenterSet, DataMatrix, LabelVector};
use crate::rng::{self, StreamRng};

pub use svd::{truncated_svd, truncated_svd_best_effort, LinearOperator, SvdOptions, SvdResult};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOptions {
    pub svd: SvdOptions,
    /// k-means++ restarts; the lowest-objective run wins.
    pub restarts: usize,
    /// Lloyd iteration cap inside each restart.
    pub max_lloyd_iter: usize,
    /// When false, an SVD that exhausts its sweep budget still yields the
    /// last subspace iterate instead of an error.
    pub require_convergence: bool,
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            svd: SvdOptions::default(),
            restarts: 30,
            max_lloyd_iter: 100,
            require_convergence: true,
            seed: 0,
        }
    }
}

impl SpectralOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.svd.seed = rng::child_seed(seed, "svd", 0);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansSolution {
    pub labels: LabelVector,
    pub centers: CenterSet,
    pub objective: f64,
    /// Final objective of each restart, in restart order.
    pub restart_objectives: Vec<f64>,
    /// Lloyd run of the winning restart.
    pub best_run: FitResult,
}

/// Returns `U_k U_k^T`-style projection of every row: `Y V V^T` with `V` the
/// top-k right singular vectors (n x d output, rank k).
pub fn spectral_project(data: &DataMatrix, k: usize, options: &SvdOptions) -> Result<DataMatrix> {
    let svd = truncated_svd(data, k, options)?;
    let coords = data.as_array().dot(&svd.right_vectors);
    DataMatrix::new(coords.dot(&svd.right_vectors.t()))
}

/// k-means++ seeding followed by Lloyd iterations, repeated `restarts`
/// times; returns the lowest-objective run (earliest on ties).
pub fn approx_kmeans(
    points: &DataMatrix,
    k: usize,
    restarts: usize,
    max_iter: usize,
    seed: u64,
) -> Result<KMeansSolution> {
    if k == 0 {
        return Err(ClusterError::InvalidParameter("k must be at least 1".into()));
    }
    if k > points.n() {
        return Err(ClusterError::TooManyClusters { k, n: points.n() });
    }
    if restarts == 0 {
        return Err(ClusterError::InvalidParameter("restarts must be at least 1".into()));
    }
    let config = LloydConfig::default().with_max_iter(max_iter.max(1));
    let runs: Vec<Result<FitResult>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(seed, "kmeans++", r as u64);
            let init = kmeans_plus_plus(points, k, &mut rng);
            fit_lloyd(points, k, &Init::Centers(init), &config, None)
        })
        .collect();

    let mut restart_objectives = Vec::with_capacity(restarts);
    let mut best: Option<(f64, FitResult)> = None;
    for run in runs {
        let run = run?;
        let objective = run
            .trace
            .last()
            .and_then(|e| e.metrics.objective)
            .unwrap_or(f64::INFINITY);
        restart_objectives.push(objective);
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            best = Some((objective, run));
        }
    }
    let (objective, best_run) = best.expect("restarts >= 1");
    Ok(KMeansSolution {
        labels: best_run.labels.clone(),
        centers: best_run.centers.clone(),
        objective,
        restart_objectives,
        best_run,
    })
}

/// Distance-squared weighted seeding.
fn kmeans_plus_plus(points: &DataMatrix, k: usize, rng: &mut StreamRng) -> CenterSet {
    let n = points.n();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut dist: Vec<f64> = (0..n)
        .map(|i| squared_distance(points.row(i), points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = dist.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in dist.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        chosen.push(next);
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(squared_distance(points.row(i), points.row(next)));
        }
    }
    CenterSet::from_array_unchecked(points.as_array().select(Axis(0), &chosen))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSolution {
    pub labels: LabelVector,
    /// Centers in the original column coordinates.
    pub centers: CenterSet,
    /// Row coordinates in the k-dimensional singular basis, `A V_k`.
    pub embedding: Array2<f64>,
    pub svd: Option<SvdResult>,
}

/// Spectral clustering of the rows of `data`.
pub fn spectral_cluster(data: &DataMatrix, k: usize, options: &SpectralOptions) -> Result<SpectralSolution> {
    spectral_cluster_operator(data, k, options)
}

/// Spectral clustering of the rows of any [`LinearOperator`].
///
/// k-means runs on the k-dimensional coordinates `A V_k`, which are
/// isometric to the projected rows `A V_k V_k^T`; centers are lifted back
/// through `V_k^T`.
pub fn spectral_cluster_operator<Op: LinearOperator + ?Sized>(
    op: &Op,
    k: usize,
    options: &SpectralOptions,
) -> Result<SpectralSolution> {
    let n = op.nrows();
    if k == 0 {
        return Err(ClusterError::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(ClusterError::TooManyClusters { k, n });
    }
    if k == 1 {
        // column sums of A = A^T 1
        let sums = op.apply_transpose(Array2::from_elem((n, 1), 1.0).view());
        let mean = sums.t().mapv(|v| v / n as f64);
        return Ok(SpectralSolution {
            labels: LabelVector::from_vec_unchecked(vec![0; n], 1),
            centers: CenterSet::new(mean)?,
            embedding: Array2::zeros((n, 0)),
            svd: None,
        });
    }
    let svd = if options.require_convergence {
        truncated_svd(op, k, &options.svd)?
    } else {
        truncated_svd_best_effort(op, k, &options.svd)?
    };
    let embedding = op.apply(svd.right_vectors.view());
    let points = DataMatrix::new(embedding.clone())?;
    let km = approx_kmeans(&points, k, options.restarts, options.max_lloyd_iter, options.seed)?;
    let centers = CenterSet::new(km.centers.as_array().dot(&svd.right_vectors.t()))?;
    Ok(SpectralSolution {
        labels: km.labels,
        centers,
        embedding,
        svd: Some(svd),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicated_points_are_clustered_exactly() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![(i % 3) as f64 * 5.0, 1.0]).collect();
        let y = DataMatrix::from_rows(&rows).unwrap();
        let km = approx_kmeans(&y, 3, 5, 50, 1).unwrap();
        assert_eq!(km.objective, 0.0);
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(km.labels.get(i) == km.labels.get(j), i % 3 == j % 3);
            }
        }
    }

    #[test]
    fn best_restart_is_minimal() {
        let mut rng = rng::stream(2, "test", 0);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| vec![rng.random::<f64>() * 10.0, rng.random::<f64>()])
            .collect();
        let y = DataMatrix::from_rows(&rows).unwrap();
        let km = approx_kmeans(&y, 4, 10, 100, 3).unwrap();
        assert!(km.restart_objectives.iter().all(|&o| km.objective <= o));
        assert!(km.best_run.trace.objective_is_non_increasing(1e-9));
    }

    #[test]
    fn one_dimensional_two_partition() {
        // 2-partitions of {0,0,10,10} by enumeration: only {0,0}|{10,10} has
        // objective 0; every other split has objective >= 50.
        let y = DataMatrix::from_rows(&[vec![0.0], vec![0.0], vec![10.0], vec![10.0]]).unwrap();
        let km = approx_kmeans(&y, 2, 30, 100, 0).unwrap();
        let mut c: Vec<f64> = km.centers.as_array().iter().copied().collect();
        c.sort_by(f64::total_cmp);
        assert_eq!(c, vec![0.0, 10.0]);
    }

    #[test]
    fn k_equal_one_labels_everything_zero() {
        let y = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let sol = spectral_cluster(&y, 1, &SpectralOptions::default()).unwrap();
        assert_eq!(sol.labels.as_slice(), &[0, 0]);
        assert_eq!(sol.centers.center(0).to_vec(), vec![2.0, 3.0]);
    }

    #[test]
    fn noiseless_centers_are_recovered() {
        let centers = [vec![3.0, 0.0, 0.0, 1.0], vec![0.0, 3.0, 0.0, 1.0], vec![0.0, 0.0, 3.0, 1.0]];
        let truth: Vec<usize> = (0..30).map(|i| (i * 7) % 3).collect();
        let rows: Vec<Vec<f64>> = truth.iter().map(|&h| centers[h].clone()).collect();
        let y = DataMatrix::from_rows(&rows).unwrap();
        let sol = spectral_cluster(&y, 3, &SpectralOptions::default().with_seed(4)).unwrap();
        let truth = LabelVector::new(truth, 3).unwrap();
        assert_eq!(crate::model::misclustering_rate(&truth, &sol.labels).unwrap().rate, 0.0);
        // lifted centers coincide with the true ones up to relabeling
        for h in 0..3 {
            let c = sol.centers.center(h);
            assert!(centers.iter().any(|t| t.iter().zip(c.iter()).all(|(a, b)| (a - b).abs() < 1e-8)));
        }
    }

    #[test]
    fn projection_is_identity_at_full_rank() {
        let y = DataMatrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 5.0], vec![2.0, -1.0, 1.0], vec![1.0, 1.0, 1.0]]).unwrap();
        let p = spectral_project(&y, 3, &SvdOptions::default()).unwrap();
        assert!((p.as_array() - y.as_array()).iter().all(|x| x.abs() < 1e-8));
    }
}
