//! Top-k singular triplets by block power (subspace) iteration.
//!
//! Each sweep multiplies the current right block by the operator, performs
//! a Rayleigh-Ritz step with one-sided Jacobi rotations on the product, and
//! re-orthonormalizes the transpose product. Only operator-block products
//! are needed, so sparse operators are handled without densifying.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ClusterError, Result};
use crate::model::DataMatrix;
use crate::rng::{self, StreamRng};

/// A real matrix accessed only through block products.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `self * x` for an `ncols x b` block.
    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64>;
    /// `self^T * x` for an `nrows x b` block.
    fn apply_transpose(&self, x: ArrayView2<'_, f64>) -> Array2<f64>;
}

impl LinearOperator for Array2<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.dot(&x)
    }

    fn apply_transpose(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.t().dot(&x)
    }
}

impl LinearOperator for DataMatrix {
    fn nrows(&self) -> usize {
        self.n()
    }

    fn ncols(&self) -> usize {
        self.d()
    }

    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.as_array().dot(&x)
    }

    fn apply_transpose(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.as_array().t().dot(&x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdOptions {
    /// Convergence requires `|A^T u - sigma v| <= tol * sigma_max` for every
    /// retained triplet.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Extra block columns beyond k; speeds convergence when the gap after
    /// sigma_k is small.
    pub oversample: usize,
    /// Seed of the Gaussian starting block.
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_sweeps: 300,
            oversample: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    /// n x k, orthonormal columns.
    pub left_vectors: Array2<f64>,
    /// Descending, non-negative.
    pub singular_values: Array1<f64>,
    /// d x k, orthonormal columns.
    pub right_vectors: Array2<f64>,
    /// Largest retained residual relative to sigma_max.
    pub residual: f64,
    pub sweeps: usize,
    pub converged: bool,
}

impl SvdResult {
    /// Orthogonal projector `V V^T` onto the span of the right vectors.
    pub fn right_projector(&self) -> Array2<f64> {
        self.right_vectors.dot(&self.right_vectors.t())
    }
}

/// Top-k singular triplets; fails if the residual criterion is not met
/// within `max_sweeps`.
pub fn truncated_svd<Op: LinearOperator + ?Sized>(
    op: &Op,
    k: usize,
    options: &SvdOptions,
) -> Result<SvdResult> {
    let result = truncated_svd_best_effort(op, k, options)?;
    if result.converged {
        Ok(result)
    } else {
        Err(ClusterError::SvdNotConverged {
            sweeps: result.sweeps,
            residual: result.residual,
            tolerance: options.tol,
        })
    }
}

/// Like [`truncated_svd`] but returns the last iterate when the sweep budget
/// runs out; check [`SvdResult::converged`].
pub fn truncated_svd_best_effort<Op: LinearOperator + ?Sized>(
    op: &Op,
    k: usize,
    options: &SvdOptions,
) -> Result<SvdResult> {
    let (n, d) = (op.nrows(), op.ncols());
    if k == 0 || k > n.min(d) {
        return Err(ClusterError::InvalidParameter(format!(
            "k = {k} must lie in 1..={} for a {n}x{d} matrix",
            n.min(d)
        )));
    }
    if options.max_sweeps == 0 {
        return Err(ClusterError::InvalidParameter("max_sweeps must be at least 1".into()));
    }
    let block = (k + options.oversample).min(n.min(d));
    let mut rng = rng::stream(options.seed, "svd-start", 0);

    let mut v = gaussian_block(d, block, &mut rng);
    orthonormalize(&mut v, &mut rng);

    let mut last = None;
    for sweep in 1..=options.max_sweeps {
        let mut w = op.apply(v.view());
        jacobi_orthogonalize(&mut w, &mut v);
        let order = descending_norm_order(&w);
        let w = w.select(Axis(1), &order);
        let v_sorted = v.select(Axis(1), &order);

        let sigma: Array1<f64> = w.columns().into_iter().map(|c| c.dot(&c).sqrt()).collect();
        let sigma_max = sigma[0];
        let floor = sigma_max * 1e-13;
        let mut u = w;
        let mut degenerate = Vec::new();
        for (j, mut col) in u.columns_mut().into_iter().enumerate() {
            if sigma[j] > floor && sigma[j] > 0.0 {
                col /= sigma[j];
            } else {
                degenerate.push(j);
            }
        }
        complete_columns(&mut u, &degenerate, &mut rng);

        let z = op.apply_transpose(u.view());
        let scale = if sigma_max > 0.0 { sigma_max } else { 1.0 };
        let residual = (0..k)
            .map(|j| {
                let sigma_j = if degenerate.contains(&j) { 0.0 } else { sigma[j] };
                let diff = &z.column(j) - &(&v_sorted.column(j) * sigma_j);
                diff.dot(&diff).sqrt() / scale
            })
            .fold(0.0, f64::max);

        let converged = residual <= options.tol;
        let take = |m: &Array2<f64>| m.select(Axis(1), &(0..k).collect::<Vec<_>>());
        let singular_values = sigma
            .iter()
            .enumerate()
            .take(k)
            .map(|(j, &s)| if degenerate.contains(&j) { 0.0 } else { s })
            .collect();
        let result = SvdResult {
            left_vectors: take(&u),
            singular_values,
            right_vectors: take(&v_sorted),
            residual,
            sweeps: sweep,
            converged,
        };
        if converged {
            return Ok(result);
        }
        last = Some(result);

        v = z;
        orthonormalize(&mut v, &mut rng);
    }
    Ok(last.expect("at least one sweep"))
}

fn gaussian_block(rows: usize, cols: usize, rng: &mut StreamRng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample::<f64, _>(StandardNormal))
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns that
/// collapse are replaced by random vectors orthogonal to the rest.
pub(crate) fn orthonormalize(m: &mut Array2<f64>, rng: &mut StreamRng) {
    let cols = m.ncols();
    for j in 0..cols {
        let original = norm(&m.column(j).to_owned());
        for _pass in 0..2 {
            for p in 0..j {
                let proj = m.column(p).dot(&m.column(j));
                let basis = m.column(p).to_owned();
                m.column_mut(j).scaled_add(-proj, &basis);
            }
        }
        let nrm = norm(&m.column(j).to_owned());
        if nrm <= 1e-10 * original.max(f64::MIN_POSITIVE) || nrm == 0.0 {
            let against: Vec<usize> = (0..j).collect();
            random_orthogonal_column(m, j, &against, rng);
        } else {
            m.column_mut(j).mapv_inplace(|x| x / nrm);
        }
    }
}

/// Replace the listed columns (whose other columns are orthonormal) by
/// random unit vectors orthogonal to everything else.
fn complete_columns(m: &mut Array2<f64>, cols: &[usize], rng: &mut StreamRng) {
    for (idx, &j) in cols.iter().enumerate() {
        let against: Vec<usize> = (0..m.ncols())
            .filter(|p| *p != j && !cols[idx..].contains(p))
            .collect();
        random_orthogonal_column(m, j, &against, rng);
    }
}

fn random_orthogonal_column(m: &mut Array2<f64>, j: usize, against: &[usize], rng: &mut StreamRng) {
    let rows = m.nrows();
    for _attempt in 0..10 {
        let mut col: Array1<f64> = (0..rows).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for _pass in 0..2 {
            for &p in against {
                let basis = m.column(p);
                let proj = basis.dot(&col);
                col.scaled_add(-proj, &basis);
            }
        }
        let nrm = norm(&col);
        if nrm > 1e-8 {
            m.column_mut(j).assign(&(col / nrm));
            return;
        }
    }
    m.column_mut(j).fill(0.0);
}

fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

/// One-sided Jacobi: rotate column pairs of `w` until they are mutually
/// orthogonal, applying the same rotations to `v`.
fn jacobi_orthogonalize(w: &mut Array2<f64>, v: &mut Array2<f64>) {
    let b = w.ncols();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..b {
            for q in (p + 1)..b {
                let (alpha, beta, gamma) = {
                    let wp = w.column(p);
                    let wq = w.column(q);
                    (wp.dot(&wp), wq.dot(&wq), wp.dot(&wq))
                };
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(w, p, q, c, s);
                rotate(v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
}

fn rotate(m: &mut Array2<f64>, p: usize, q: usize, c: f64, s: f64) {
    for mut row in m.rows_mut() {
        let (x, y) = (row[p], row[q]);
        row[p] = c * x - s * y;
        row[q] = s * x + c * y;
    }
}

fn descending_norm_order(w: &Array2<f64>) -> Vec<usize> {
    let norms: Vec<f64> = w.columns().into_iter().map(|c| c.dot(&c)).collect();
    let mut order: Vec<usize> = (0..w.ncols()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rank_one_matrix() {
        let u = array![1.0, 2.0, -1.0, 0.5];
        let v = array![3.0, 0.0, 4.0];
        let a = u.view().insert_axis(Axis(1)).dot(&v.view().insert_axis(Axis(0)));
        let svd = truncated_svd(&a, 2, &SvdOptions::default()).unwrap();
        let expected = norm(&u) * norm(&v);
        assert!((svd.singular_values[0] - expected).abs() < 1e-10 * expected);
        assert!(svd.singular_values[1] <= 1e-8 * expected);
    }

    #[test]
    fn diagonal_matrix_sorted_magnitudes() {
        let a = Array2::from_diag(&array![1.0, -5.0, 3.0, 0.5, 2.0]);
        let svd = truncated_svd(&a, 3, &SvdOptions::default()).unwrap();
        for (got, want) in svd.singular_values.iter().zip([5.0, 3.0, 2.0]) {
            assert!((got - want).abs() < 1e-10);
        }
    }

    #[test]
    fn vectors_are_orthonormal() {
        let mut rng = rng::stream(5, "test", 0);
        let a = gaussian_block(40, 25, &mut rng);
        let svd = truncated_svd(&a, 6, &SvdOptions::default()).unwrap();
        for m in [&svd.left_vectors, &svd.right_vectors] {
            let gram = m.t().dot(m);
            let eye = Array2::<f64>::eye(6);
            assert!((&gram - &eye).iter().all(|x| x.abs() < 1e-8));
        }
        assert!(svd.singular_values.windows(2).into_iter().all(|w| w[0] >= w[1]));
    }

    #[test]
    fn bad_k_and_budget() {
        let a = Array2::<f64>::eye(3);
        assert!(truncated_svd(&a, 4, &SvdOptions::default()).is_err());
        assert!(truncated_svd(&a, 0, &SvdOptions::default()).is_err());
        let opts = SvdOptions { max_sweeps: 0, ..SvdOptions::default() };
        assert!(truncated_svd(&a, 1, &opts).is_err());
    }

    #[test]
    fn non_convergence_reports_residual() {
        // Clustered spectrum with no oversampling and a single sweep.
        let mut rng = rng::stream(9, "test", 0);
        let a = gaussian_block(60, 60, &mut rng);
        let opts = SvdOptions { max_sweeps: 1, oversample: 0, ..SvdOptions::default() };
        match truncated_svd(&a, 5, &opts) {
            Err(ClusterError::SvdNotConverged { sweeps, residual, .. }) => {
                assert_eq!(sweeps, 1);
                assert!(residual > opts.tol);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
        let partial = truncated_svd_best_effort(&a, 5, &opts).unwrap();
        assert!(!partial.converged);
        assert_eq!(partial.singular_values.len(), 5);
    }
}
