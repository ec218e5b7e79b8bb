use crate::error::{ClusterError, Result};

use super::types::{pairwise_distances, CenterSet};

/// Parameters of a mixture: true centers, noise scale and cluster sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDescription {
    pub centers: CenterSet,
    pub sigma: f64,
    pub sizes: Vec<usize>,
}

/// Separation and signal-to-noise quantities of a mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport {
    /// Minimum pairwise center distance.
    pub delta: f64,
    /// Maximum over minimum pairwise center distance (>= 1).
    pub lambda: f64,
    /// Smallest cluster size as a fraction of n.
    pub alpha: f64,
    /// 9d/n.
    pub eta: f64,
    /// Two-mixture ratio `|theta*| / (sigma * sqrt(1 + eta))` with
    /// `|theta*|` half the distance between the two centers; `None` unless k = 2.
    pub r: Option<f64>,
    /// `(delta / sigma) * sqrt(alpha / (1 + k d / n))`.
    pub r_k: f64,
}

pub fn snr_report(mixture: &MixtureDescription) -> Result<SnrReport> {
    let k = mixture.centers.k();
    let d = mixture.centers.d() as f64;
    if k < 2 {
        return Err(ClusterError::InvalidParameter(
            "signal-to-noise quantities need at least two centers".into(),
        ));
    }
    if !(mixture.sigma > 0.0 && mixture.sigma.is_finite()) {
        return Err(ClusterError::InvalidParameter(format!(
            "sigma must be positive, got {}",
            mixture.sigma
        )));
    }
    if mixture.sizes.len() != k {
        return Err(ClusterError::LengthMismatch {
            expected: k,
            got: mixture.sizes.len(),
        });
    }
    if mixture.sizes.contains(&0) {
        return Err(ClusterError::InvalidParameter("cluster sizes must be positive".into()));
    }

    let distances = pairwise_distances(mixture.centers.as_array());
    let delta = distances.iter().copied().fold(f64::INFINITY, f64::min);
    let max_dist = distances.iter().copied().fold(0.0, f64::max);
    if delta == 0.0 {
        return Err(ClusterError::CoincidentCenters);
    }

    let n = mixture.sizes.iter().sum::<usize>() as f64;
    let alpha = *mixture.sizes.iter().min().expect("k >= 2") as f64 / n;
    let eta = 9.0 * d / n;
    let sigma = mixture.sigma;
    let r = (k == 2).then(|| (delta / 2.0) / (sigma * (1.0 + eta).sqrt()));
    let r_k = (delta / sigma) * (alpha / (1.0 + k as f64 * d / n)).sqrt();

    Ok(SnrReport {
        delta,
        lambda: max_dist / delta,
        alpha,
        eta,
        r,
        r_k,
    })
}
