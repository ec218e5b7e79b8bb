//! Seeded generators for every model in the crate.
//!
//! Each sampler takes a master seed and draws from named [`crate::rng`]
//! streams, so output is a pure function of `(spec, seed)` regardless of
//! how many threads are used.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::crowd::{ConfusionTensor, CrowdTable};
use crate::error::{ClusterError, Result};
use crate::graph::{AdjacencyMatrix, BinaryMatrix};
use crate::model::{CenterSet, DataMatrix, LabelVector};
use crate::rng::stream;

/// Gaussian mixture with spherical noise.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmSpec {
    pub centers: CenterSet,
    pub sigma: f64,
    pub sizes: Vec<usize>,
}

impl GmmSpec {
    pub fn new(centers: CenterSet, sigma: f64, sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() != centers.k() {
            return Err(ClusterError::LengthMismatch {
                expected: centers.k(),
                got: sizes.len(),
            });
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(ClusterError::InvalidParameter("cluster sizes must be positive".into()));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(ClusterError::InvalidParameter(format!("invalid noise scale {sigma}")));
        }
        Ok(Self {
            centers,
            sigma,
            sizes,
        })
    }

    /// Centers at the first k standard basis vectors of R^d, equal sizes.
    pub fn orthonormal(k: usize, d: usize, per_cluster: usize, sigma: f64) -> Result<Self> {
        if k == 0 || k > d {
            return Err(ClusterError::InvalidParameter(format!(
                "need 1 <= k <= d for orthonormal centers, got k={k}, d={d}"
            )));
        }
        let mut centers = Array2::zeros((k, d));
        for h in 0..k {
            centers[(h, h)] = 1.0;
        }
        Self::new(CenterSet::new(centers)?, sigma, vec![per_cluster; k])
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Labels in contiguous blocks: all of cluster 0, then cluster 1, ...
    pub fn labels(&self) -> LabelVector {
        let labels = self
            .sizes
            .iter()
            .enumerate()
            .flat_map(|(h, &s)| std::iter::repeat_n(h, s))
            .collect();
        LabelVector::from_vec_unchecked(labels, self.sizes.len())
    }
}

/// Noise scale for orthonormal centers at a given SNR: `sigma = 2 / snr`.
pub fn sigma_for_snr(snr: f64) -> f64 {
    2.0 / snr
}

/// `y_i = theta_{z_i} + sigma * g_i` with standard Gaussian `g_i`.
pub fn sample_gmm(spec: &GmmSpec, seed: u64) -> (DataMatrix, LabelVector) {
    let labels = spec.labels();
    let d = spec.centers.d();
    let mut rng = stream(seed, "gmm", 0);
    let mut y = Array2::zeros((labels.len(), d));
    for (i, &h) in labels.as_slice().iter().enumerate() {
        let center = spec.centers.center(h);
        for j in 0..d {
            let g: f64 = rng.sample(StandardNormal);
            y[(i, j)] = center[j] + spec.sigma * g;
        }
    }
    (DataMatrix::from_array_unchecked(y), labels)
}

/// `y_i = z_i theta* + sigma g_i` with `z_i` uniform on {+1, -1}.
pub fn sample_symmetric_two(
    theta_star: &Array1<f64>,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<(DataMatrix, Vec<i8>)> {
    if n < 2 {
        return Err(ClusterError::InvalidParameter("need at least two samples".into()));
    }
    if theta_star.is_empty() || !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(ClusterError::InvalidParameter("invalid center or noise scale".into()));
    }
    let d = theta_star.len();
    let mut rng = stream(seed, "symmetric-two", 0);
    let mut y = Array2::zeros((n, d));
    let mut signs = Vec::with_capacity(n);
    for i in 0..n {
        let z: i8 = if rng.random::<bool>() { 1 } else { -1 };
        for j in 0..d {
            let g: f64 = rng.sample(StandardNormal);
            y[(i, j)] = f64::from(z) * theta_star[j] + sigma * g;
        }
        signs.push(z);
    }
    Ok((DataMatrix::from_array_unchecked(y), signs))
}

/// Stochastic block model: nodes in communities i, j are linked with
/// probability `a/n` when they share a community and `b/n` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmSpec {
    pub n: usize,
    pub k: usize,
    pub a: f64,
    pub b: f64,
    pub sizes: Vec<usize>,
}

impl SbmSpec {
    pub fn new(a: f64, b: f64, sizes: Vec<usize>) -> Result<Self> {
        let n: usize = sizes.iter().sum();
        if sizes.is_empty() || sizes.iter().any(|&s| s == 0) {
            return Err(ClusterError::InvalidParameter("community sizes must be positive".into()));
        }
        let nf = n as f64;
        if !(a > 0.0 && a < nf && b > 0.0 && b < nf) {
            return Err(ClusterError::InvalidParameter(format!(
                "connectivities must lie in (0, n): a={a}, b={b}, n={n}"
            )));
        }
        Ok(Self {
            n,
            k: sizes.len(),
            a,
            b,
            sizes,
        })
    }

    /// From edge probabilities rather than scaled connectivities.
    pub fn from_probabilities(p_within: f64, p_between: f64, sizes: Vec<usize>) -> Result<Self> {
        let n = sizes.iter().sum::<usize>() as f64;
        Self::new(p_within * n, p_between * n, sizes)
    }

    /// n = 2000, k = 10 equal communities, probabilities 0.20 / 0.11.
    pub fn balanced() -> Self {
        Self::from_probabilities(0.20, 0.11, vec![200; 10]).expect("valid preset")
    }

    /// n = 2000, k = 4 equal communities, probabilities 0.019 / 0.005.
    pub fn sparse() -> Self {
        Self::from_probabilities(0.019, 0.005, vec![500; 4]).expect("valid preset")
    }

    /// n = 1000, k = 4 communities of sizes 100..400, probabilities 0.35 / 0.22.
    pub fn unbalanced() -> Self {
        Self::from_probabilities(0.35, 0.22, vec![100, 200, 300, 400]).expect("valid preset")
    }

    pub fn p_within(&self) -> f64 {
        self.a / self.n as f64
    }

    pub fn p_between(&self) -> f64 {
        self.b / self.n as f64
    }

    pub fn labels(&self) -> LabelVector {
        let labels = self
            .sizes
            .iter()
            .enumerate()
            .flat_map(|(h, &s)| std::iter::repeat_n(h, s))
            .collect();
        LabelVector::from_vec_unchecked(labels, self.k)
    }
}

/// Each pair i < j is drawn once from row i's stream and mirrored.
pub fn sample_sbm(spec: &SbmSpec, seed: u64) -> (AdjacencyMatrix, LabelVector) {
    let labels = spec.labels();
    let z = labels.as_slice();
    let (p_in, p_out) = (spec.p_within(), spec.p_between());
    let upper: Vec<Vec<usize>> = (0..spec.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, "sbm-row", i as u64);
            (i + 1..spec.n)
                .filter(|&j| {
                    let p = if z[i] == z[j] { p_in } else { p_out };
                    rng.random::<f64>() < p
                })
                .collect()
        })
        .collect();
    let mut rows = upper.clone();
    for (i, row) in upper.iter().enumerate() {
        for &j in row {
            rows[j].push(i);
        }
    }
    let matrix = BinaryMatrix::from_rows(spec.n, rows).expect("sampled rows are distinct");
    let adjacency = AdjacencyMatrix::from_symmetric(matrix).expect("sampled graph is symmetric");
    (adjacency, labels)
}

/// Dawid-Skene emission: worker i answers item j from row `z_j` of its
/// confusion matrix, and each answer is observed independently with
/// probability `observe_prob`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrowdSpec {
    pub confusion: ConfusionTensor,
    pub observe_prob: f64,
}

impl CrowdSpec {
    pub fn new(confusion: ConfusionTensor, observe_prob: f64) -> Result<Self> {
        if !(observe_prob > 0.0 && observe_prob <= 1.0) {
            return Err(ClusterError::InvalidParameter(format!(
                "observation probability must lie in (0, 1], got {observe_prob}"
            )));
        }
        Ok(Self {
            confusion,
            observe_prob,
        })
    }

    /// Diagonal entries drawn independently from U[lo, hi]; the remaining
    /// mass of each row is split evenly over the other classes.
    pub fn uniform_diagonal(
        m: usize,
        k: usize,
        lo: f64,
        hi: f64,
        observe_prob: f64,
        seed: u64,
    ) -> Result<Self> {
        if k < 2 || m == 0 || !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            return Err(ClusterError::InvalidParameter(
                "need m >= 1, k >= 2 and 0 <= lo <= hi <= 1".into(),
            ));
        }
        let mut rng = stream(seed, "crowd-confusion", 0);
        let rows: Vec<Vec<Vec<f64>>> = (0..m)
            .map(|_| {
                (0..k)
                    .map(|g| {
                        let diag = lo + (hi - lo) * rng.random::<f64>();
                        let off = (1.0 - diag) / (k - 1) as f64;
                        (0..k).map(|h| if g == h { diag } else { off }).collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(ConfusionTensor::new(&rows)?, observe_prob)
    }

    /// m = 100 workers, k = 2, diagonals from U[0.3, 0.9].
    pub fn simulation_preset(observe_prob: f64, seed: u64) -> Result<Self> {
        Self::uniform_diagonal(100, 2, 0.3, 0.9, observe_prob, seed)
    }
}

/// Labels drawn uniformly from `0..k`.
pub fn sample_uniform_labels(n: usize, k: usize, seed: u64) -> Result<LabelVector> {
    if k == 0 {
        return Err(ClusterError::InvalidParameter("k must be positive".into()));
    }
    let mut rng = stream(seed, "uniform-labels", 0);
    Ok(LabelVector::from_vec_unchecked(
        (0..n).map(|_| rng.random_range(0..k)).collect(),
        k,
    ))
}

/// Draw a worker-by-item answer table for the given true labels.
pub fn sample_crowd(spec: &CrowdSpec, truth: &LabelVector, seed: u64) -> Result<CrowdTable> {
    let pi = &spec.confusion;
    let (m, k, n) = (pi.workers(), pi.classes(), truth.len());
    if truth.k() != k {
        return Err(ClusterError::ClusterCountMismatch {
            left: k,
            right: truth.k(),
        });
    }
    let rows: Vec<Vec<u16>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, "crowd-worker", i as u64);
            truth
                .as_slice()
                .iter()
                .map(|&g| {
                    let observed = rng.random::<f64>() < spec.observe_prob;
                    let u: f64 = rng.random();
                    if !observed {
                        return 0;
                    }
                    let row = pi.row(i, g);
                    let mut acc = 0.0;
                    for (h, &p) in row.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            return h as u16 + 1;
                        }
                    }
                    // rounding left u above the last partial sum
                    row.iter().rposition(|&p| p > 0.0).unwrap_or(k - 1) as u16 + 1
                })
                .collect()
        })
        .collect();
    CrowdTable::new(m, n, k, rows.concat())
}

/// Noiseless six-cluster configuration with a three-center initializer
/// that Lloyd's iterations cannot escape.
///
/// Inner centers 0..3 form an equilateral triangle of side `delta`; outer
/// center `i + 3` sits `lambda * delta` further out along the ray from the
/// triangle's centroid through center i. Initial cluster i merges all of
/// inner cluster i (`m - r` points) with all of outer cluster `i + 3`
/// (`r = round(m / (2 lambda))` points), so its mean lies `~delta / 2` from
/// center i, towards center `i + 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub data: DataMatrix,
    /// Six true clusters.
    pub truth: LabelVector,
    /// Three clusters, label `i mod 3` for true cluster i.
    pub bad_init: LabelVector,
    pub centers: CenterSet,
    /// Points taken from each outer cluster into the merged clusters.
    pub mixed_count: usize,
    /// Whether `m / (2 lambda)` was an integer (no rounding needed).
    pub exact: bool,
}

impl Counterexample {
    /// Means of the three initial clusters.
    pub fn init_centers(&self) -> CenterSet {
        let m = (self.truth.sizes()[0] + self.mixed_count) as f64;
        let w = self.mixed_count as f64 / m;
        let mut c = Array2::zeros((3, 2));
        for i in 0..3 {
            for j in 0..2 {
                c[(i, j)] = (1.0 - w) * self.centers.center(i)[j] + w * self.centers.center(i + 3)[j];
            }
        }
        CenterSet::from_array_unchecked(c)
    }
}

pub fn counterexample_fixture(m: usize, lambda: f64, delta: f64) -> Result<Counterexample> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return Err(ClusterError::InvalidParameter(format!("lambda must be >= 1, got {lambda}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(ClusterError::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let ideal = m as f64 / (2.0 * lambda);
    let r = ideal.round() as usize;
    if r == 0 || r >= m {
        return Err(ClusterError::InvalidParameter(format!(
            "m = {m} is too small to mix {ideal:.3} points per cluster"
        )));
    }
    let radius = delta / 3f64.sqrt();
    let mut centers = Array2::zeros((6, 2));
    for i in 0..3 {
        let angle = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * i as f64 / 3.0;
        let (s, c) = angle.sin_cos();
        centers[(i, 0)] = radius * c;
        centers[(i, 1)] = radius * s;
        centers[(i + 3, 0)] = (radius + lambda * delta) * c;
        centers[(i + 3, 1)] = (radius + lambda * delta) * s;
    }
    let sizes = [m - r, m - r, m - r, r, r, r];
    let mut points = Vec::with_capacity(3 * m);
    let mut truth = Vec::with_capacity(3 * m);
    for (h, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            points.push(vec![centers[(h, 0)], centers[(h, 1)]]);
            truth.push(h);
        }
    }
    let bad_init = truth.iter().map(|&h| h % 3).collect();
    Ok(Counterexample {
        data: DataMatrix::from_rows(&points)?,
        truth: LabelVector::from_vec_unchecked(truth, 6),
        bad_init: LabelVector::from_vec_unchecked(bad_init, 3),
        centers: CenterSet::from_array_unchecked(centers),
        mixed_count: r,
        exact: (ideal - r as f64).abs() < 1e-12,
    })
}
