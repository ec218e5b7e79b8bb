//! Seeded initializers built from (or independent of) the truth, used to
//! start fits at a controlled error level.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{ClusterError, Result};
use crate::model::LabelVector;
use crate::rng;

fn check_fraction(fraction: f64) -> Result<()> {
    if (0.0..=1.0).contains(&fraction) {
        Ok(())
    } else {
        Err(ClusterError::InvalidParameter(format!(
            "fraction must lie in [0, 1], got {fraction}"
        )))
    }
}

/// Move `round(fraction * n_h)` uniformly chosen members of every true
/// cluster `h` to cluster `(h + 1) mod k`.
///
/// With equal cluster sizes and `fraction < 1/2` every aligned cluster then
/// has false-positive and true-negative fractions equal to `fraction`, so
/// the group-wise rate of the result is `fraction` up to rounding.
pub fn corrupt_cyclic(truth: &LabelVector, fraction: f64, seed: u64) -> Result<LabelVector> {
    check_fraction(fraction)?;
    let k = truth.k();
    let mut labels = truth.as_slice().to_vec();
    for h in 0..k {
        let members: Vec<usize> = (0..truth.len()).filter(|&i| truth.get(i) == h).collect();
        let moved = (fraction * members.len() as f64).round() as usize;
        let mut rng = rng::stream(seed, "corrupt-cyclic", h as u64);
        for pick in sample(&mut rng, members.len(), moved) {
            labels[members[pick]] = (h + 1) % k;
        }
    }
    LabelVector::new(labels, k)
}

/// Swap labels 0 and 1 on `round(fraction * n)` uniformly chosen items of a
/// two-cluster labeling.
pub fn flip_fraction(truth: &LabelVector, fraction: f64, seed: u64) -> Result<LabelVector> {
    check_fraction(fraction)?;
    if truth.k() != 2 {
        return Err(ClusterError::InvalidParameter("flip_fraction needs k = 2".into()));
    }
    let mut labels = truth.as_slice().to_vec();
    let flips = (fraction * labels.len() as f64).round() as usize;
    let mut rng = rng::stream(seed, "flip-fraction", 0);
    for i in sample(&mut rng, labels.len(), flips) {
        labels[i] = 1 - labels[i];
    }
    LabelVector::new(labels, 2)
}

/// Uniform labels over `0..k`.
pub fn random_labels<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> LabelVector {
    LabelVector::from_vec_unchecked((0..n).map(|_| rng.random_range(0..k)).collect(), k)
}
