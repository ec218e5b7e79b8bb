//! Truncated SVD against a dense eigensolve of the Gram matrix.

use lloyd_core::rng;
use lloyd_core::spectral::{truncated_svd, SvdOptions};
use nalgebra::DMatrix;
use ndarray::Array2;
use rand::Rng;

fn random_matrix(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut r = rng::stream(seed, "svd-oracle", 0);
    Array2::from_shape_fn((n, d), |_| r.random::<f64>() * 2.0 - 1.0)
}

/// Singular values as square roots of the Gram matrix eigenvalues, descending.
fn gram_singular_values(a: &Array2<f64>) -> Vec<f64> {
    let (n, d) = a.dim();
    let m = DMatrix::from_row_slice(n, d, a.as_slice().unwrap());
    let gram = m.transpose() * &m;
    let mut values: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    values
}

#[test]
fn singular_values_match_gram_eigensolve() {
    for case in 0..30u64 {
        let n = 5 + (case as usize * 7) % 46;
        let d = 3 + (case as usize * 11) % 48;
        let a = random_matrix(n, d, case);
        let k = 1 + (case as usize) % n.min(d).min(6);
        let svd = truncated_svd(&a, k, &SvdOptions::default()).unwrap();
        let oracle = gram_singular_values(&a);
        for (got, want) in svd.singular_values.iter().zip(&oracle) {
            assert!(
                (got - want).abs() <= 1e-6 * want.max(1e-12),
                "case {case} ({n}x{d}, k={k}): {got} vs {want}"
            );
        }
        let p = svd.right_projector();
        let asym = (&p - &p.t()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let idem = (p.dot(&p) - &p).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(asym < 1e-8 && idem < 1e-8, "case {case}: projector errors {asym:e} {idem:e}");
    }
}

#[test]
fn singular_vectors_are_consistent() {
    let a = random_matrix(40, 25, 99);
    let svd = truncated_svd(&a, 4, &SvdOptions::default()).unwrap();
    // A v_j = s_j u_j
    let av = a.dot(&svd.right_vectors);
    for j in 0..4 {
        let diff = &av.column(j) - &(&svd.left_vectors.column(j) * svd.singular_values[j]);
        assert!(diff.iter().all(|v| v.abs() < 1e-6));
    }
    let vtv = svd.right_vectors.t().dot(&svd.right_vectors);
    assert!((vtv - Array2::<f64>::eye(4)).iter().all(|v| v.abs() < 1e-10));
}
