//! Two-component mixture with centers `theta*` and `-theta*`: a single
//! center vector and labels in {-1, +1}.

use ndarray::{s, Array1, Array2};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{ClusterError, Result};
use crate::model::trace::Recorder;
use crate::model::{kmeans_objective, CenterSet, ConvergenceTrace, DataMatrix, LabelVector, Reference};
use crate::rng;

use super::LloydConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum SymmetricInit {
    /// Initial labels, each +1 or -1.
    Signs(Vec<i8>),
    Center(Array1<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricFit {
    pub theta: Array1<f64>,
    pub signs: Vec<i8>,
    pub trace: ConvergenceTrace,
    pub iterations_run: usize,
    pub converged: bool,
}

impl SymmetricFit {
    /// Labels with +1 mapped to cluster 0 and -1 to cluster 1.
    pub fn labels(&self) -> LabelVector {
        signs_to_labels(&self.signs)
    }

    /// The two centers `theta` and `-theta`, in label order.
    pub fn centers(&self) -> CenterSet {
        pm_centers(&self.theta)
    }

    pub fn objective(&self) -> f64 {
        self.trace
            .last()
            .and_then(|e| e.metrics.objective)
            .unwrap_or(f64::INFINITY)
    }
}

pub fn signs_to_labels(signs: &[i8]) -> LabelVector {
    LabelVector::from_vec_unchecked(signs.iter().map(|&g| usize::from(g < 0)).collect(), 2)
}

pub fn labels_to_signs(labels: &LabelVector) -> Vec<i8> {
    labels.as_slice().iter().map(|&l| if l == 0 { 1 } else { -1 }).collect()
}

fn pm_centers(theta: &Array1<f64>) -> CenterSet {
    let mut c = Array2::zeros((2, theta.len()));
    c.slice_mut(s![0, ..]).assign(theta);
    c.slice_mut(s![1, ..]).assign(&theta.mapv(|v| -v));
    CenterSet::from_array_unchecked(c)
}

/// `(1/n) * sum_i z_i y_i`.
fn center_from_signs(data: &DataMatrix, signs: &[i8]) -> Result<Array1<f64>> {
    let mut theta = Array1::<f64>::zeros(data.d());
    for (i, &g) in signs.iter().enumerate() {
        theta.scaled_add(f64::from(g), &data.row(i));
    }
    theta /= data.n() as f64;
    if theta.iter().all(|&v| v == 0.0) {
        return Err(ClusterError::DegenerateCenter);
    }
    Ok(theta)
}

/// `sign(<y_i, theta>)`, with zero inner products sent to +1.
fn signs_from_center(data: &DataMatrix, theta: &Array1<f64>) -> Vec<i8> {
    data.as_array()
        .rows()
        .into_iter()
        .map(|y| if y.dot(theta) >= 0.0 { 1 } else { -1 })
        .collect()
}

/// Lloyd iterations specialized to the symmetric two-mixture.
pub fn fit_symmetric_two(
    data: &DataMatrix,
    init: &SymmetricInit,
    config: &LloydConfig,
    reference: Option<&Reference>,
) -> Result<SymmetricFit> {
    if data.n() < 2 {
        return Err(ClusterError::TooManyClusters { k: 2, n: data.n() });
    }
    let max_iter = config.budget(data.n(), 3.0)?;
    let (mut signs, mut theta) = match init {
        SymmetricInit::Signs(z) => {
            if z.len() != data.n() {
                return Err(ClusterError::InvalidInit(format!(
                    "expected {} signs, got {}",
                    data.n(),
                    z.len()
                )));
            }
            if z.iter().any(|&g| g != 1 && g != -1) {
                return Err(ClusterError::InvalidInit("signs must be +1 or -1".into()));
            }
            (z.clone(), center_from_signs(data, z)?)
        }
        SymmetricInit::Center(c) => {
            if c.len() != data.d() {
                return Err(ClusterError::InvalidInit(format!(
                    "expected a center of length {}, got {}",
                    data.d(),
                    c.len()
                )));
            }
            let z = signs_from_center(data, c);
            let theta = center_from_signs(data, &z)?;
            (z, theta)
        }
    };

    let mut recorder = Recorder::new(reference);
    let record = |rec: &mut Recorder, s: usize, signs: &[i8], theta: &Array1<f64>| -> Result<()> {
        let centers = pm_centers(theta);
        let objective = kmeans_objective(data, &centers)?;
        rec.record(s, &signs_to_labels(signs), Some(&centers), Some(objective));
        Ok(())
    };
    record(&mut recorder, 0, &signs, &theta)?;

    let mut converged = false;
    let mut iterations_run = 0;
    for s in 1..=max_iter {
        let next_signs = signs_from_center(data, &theta);
        let next_theta = center_from_signs(data, &next_signs)?;
        let unchanged = next_signs == signs;
        signs = next_signs;
        theta = next_theta;
        iterations_run = s;
        record(&mut recorder, s, &signs, &theta)?;
        if unchanged {
            converged = true;
            if config.early_stop {
                break;
            }
        }
    }

    Ok(SymmetricFit {
        theta,
        signs,
        trace: recorder.finish(),
        iterations_run,
        converged,
    })
}

/// `ceil(3 ln(1/delta))` random initializers.
pub fn restart_count(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ClusterError::InvalidParameter(format!(
            "failure probability must lie in (0, 1), got {delta}"
        )));
    }
    // Guard against ln rounding just above an integer (e.g. delta = e^-1).
    Ok(((3.0 * (1.0 / delta).ln() - 1e-9).ceil() as usize).max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomSearch {
    pub best: SymmetricFit,
    /// Number of random sign vectors drawn (each is also run flipped).
    pub restarts: usize,
    /// Final objective of every run, in order (restart r at 2r, its flip at 2r + 1).
    pub objectives: Vec<f64>,
}

/// Data-independent random initialization for the symmetric two-mixture.
///
/// Draws `ceil(3 ln(1/delta))` uniform sign vectors, runs
/// [`fit_symmetric_two`] from each and from its global flip, and keeps the
/// run with the smallest k-means objective (earliest on ties). Runs whose
/// center update degenerates are skipped.
pub fn random_init_search(
    data: &DataMatrix,
    delta: f64,
    config: &LloydConfig,
    reference: Option<&Reference>,
) -> Result<RandomSearch> {
    let restarts = restart_count(delta)?;
    let runs: Vec<Result<SymmetricFit>> = (0..restarts)
        .into_par_iter()
        .flat_map_iter(|r| {
            let mut rng = rng::stream(config.seed, "random-init", r as u64);
            let signs: Vec<i8> = (0..data.n())
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            let flipped: Vec<i8> = signs.iter().map(|g| -g).collect();
            [signs, flipped].into_iter().map(move |z| {
                fit_symmetric_two(data, &SymmetricInit::Signs(z), config, reference)
            })
        })
        .collect();

    let objectives: Vec<f64> = runs
        .iter()
        .map(|r| r.as_ref().map_or(f64::INFINITY, SymmetricFit::objective))
        .collect();
    let mut best: Option<SymmetricFit> = None;
    let mut last_err = None;
    for run in runs {
        match run {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.objective() < b.objective()) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some(best) => Ok(RandomSearch {
            best,
            restarts,
            objectives,
        }),
        None => Err(last_err.unwrap_or(ClusterError::DegenerateCenter)),
    }
}
