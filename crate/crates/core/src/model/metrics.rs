use crate::assignment::max_weight_assignment;
use crate::error::{ClusterError, Result};

use super::types::{squared_distance, CenterSet, DataMatrix, LabelVector};

/// Loss value together with the label map that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub rate: f64,
    /// `map[h]` is the true label assigned to estimated label `h`.
    pub map: Vec<usize>,
}

impl Alignment {
    /// Estimated labels rewritten into the truth's label space.
    pub fn apply(&self, estimate: &LabelVector) -> LabelVector {
        let k = estimate.k();
        LabelVector::from_vec_unchecked(
            estimate.as_slice().iter().map(|&l| self.map[l]).collect(),
            k,
        )
    }
}

fn check_pair(truth: &LabelVector, estimate: &LabelVector) -> Result<()> {
    if truth.len() != estimate.len() {
        return Err(ClusterError::LengthMismatch {
            expected: truth.len(),
            got: estimate.len(),
        });
    }
    if truth.k() != estimate.k() {
        return Err(ClusterError::ClusterCountMismatch {
            left: truth.k(),
            right: estimate.k(),
        });
    }
    if truth.is_empty() {
        return Err(ClusterError::InvalidParameter("empty label vectors".into()));
    }
    Ok(())
}

/// `counts[g][h] = |{i : truth_i = g, estimate_i = h}|`.
pub fn confusion_counts(truth: &LabelVector, estimate: &LabelVector) -> Result<Vec<Vec<usize>>> {
    check_pair(truth, estimate)?;
    let k = truth.k();
    let mut counts = vec![vec![0usize; k]; k];
    for (&g, &h) in truth.as_slice().iter().zip(estimate.as_slice()) {
        counts[g][h] += 1;
    }
    Ok(counts)
}

/// Mis-clustering rate minimized over every map from estimated to true labels
/// (not only bijections).
///
/// The minimum decouples across estimated clusters: each estimated label is
/// sent to the true label that is most frequent inside it, ties going to the
/// smallest true label.
pub fn misclustering_rate(truth: &LabelVector, estimate: &LabelVector) -> Result<Alignment> {
    let counts = confusion_counts(truth, estimate)?;
    let k = truth.k();
    let mut map = vec![0; k];
    let mut correct = 0;
    for (h, slot) in map.iter_mut().enumerate() {
        let mut best = 0;
        for g in 1..k {
            if counts[g][h] > counts[best][h] {
                best = g;
            }
        }
        *slot = best;
        correct += counts[best][h];
    }
    Ok(Alignment {
        rate: (truth.len() - correct) as f64 / truth.len() as f64,
        map,
    })
}

/// Mis-clustering rate minimized over label permutations only.
pub fn misclustering_rate_bijective(truth: &LabelVector, estimate: &LabelVector) -> Result<Alignment> {
    let counts = confusion_counts(truth, estimate)?;
    let k = truth.k();
    // rows: estimated label h, columns: true label g
    let weights: Vec<Vec<i64>> = (0..k)
        .map(|h| (0..k).map(|g| counts[g][h] as i64).collect())
        .collect();
    let (total, map) = max_weight_assignment(&weights);
    Ok(Alignment {
        rate: (truth.len() as i64 - total) as f64 / truth.len() as f64,
        map,
    })
}

/// Group-wise mis-clustering rate with per-cluster bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Groupwise {
    pub rate: f64,
    /// Aligned estimated clusters that came out empty. Their false-positive
    /// term has a zero denominator and is counted as 0; only the
    /// true-negative term contributes for them.
    pub empty_clusters: Vec<usize>,
}

impl Groupwise {
    pub fn is_degenerate(&self) -> bool {
        !self.empty_clusters.is_empty()
    }
}

/// Worst-cluster maximum of the false-positive and true-negative fractions,
/// after aligning the estimate with the loss-minimizing map.
pub fn groupwise_rate(truth: &LabelVector, estimate: &LabelVector) -> Result<Groupwise> {
    let alignment = misclustering_rate(truth, estimate)?;
    groupwise_rate_aligned(truth, &alignment.apply(estimate))
}

pub(crate) fn groupwise_rate_aligned(truth: &LabelVector, aligned: &LabelVector) -> Result<Groupwise> {
    let counts = confusion_counts(truth, aligned)?;
    let k = truth.k();
    let mut rate: f64 = 0.0;
    let mut empty_clusters = Vec::new();
    for h in 0..k {
        let est_size: usize = (0..k).map(|g| counts[g][h]).sum();
        let true_size: usize = counts[h].iter().sum();
        let false_pos: usize = (0..k).filter(|&g| g != h).map(|g| counts[g][h]).sum();
        let true_neg: usize = (0..k).filter(|&g| g != h).map(|g| counts[h][g]).sum();
        if est_size == 0 {
            empty_clusters.push(h);
        } else {
            rate = rate.max(false_pos as f64 / est_size as f64);
        }
        if true_size > 0 {
            rate = rate.max(true_neg as f64 / true_size as f64);
        }
    }
    Ok(Groupwise {
        rate,
        empty_clusters,
    })
}

/// Worst center deviation normalized by the minimum true-center separation.
/// `map[h]` names the true center that estimated center `h` is compared with.
pub fn center_error(truth: &CenterSet, estimate: &CenterSet, map: &[usize]) -> Result<f64> {
    if truth.d() != estimate.d() {
        return Err(ClusterError::DimensionMismatch {
            expected: truth.d(),
            got: estimate.d(),
        });
    }
    if map.len() != estimate.k() {
        return Err(ClusterError::LengthMismatch {
            expected: estimate.k(),
            got: map.len(),
        });
    }
    if let Some(&label) = map.iter().find(|&&g| g >= truth.k()) {
        return Err(ClusterError::LabelOutOfRange {
            label,
            k: truth.k(),
        });
    }
    let delta = truth.min_separation().ok_or_else(|| {
        ClusterError::InvalidParameter("center error needs at least two true centers".into())
    })?;
    if delta == 0.0 {
        return Err(ClusterError::CoincidentCenters);
    }
    let worst = map
        .iter()
        .enumerate()
        .map(|(h, &g)| squared_distance(estimate.center(h), truth.center(g)).sqrt())
        .fold(0.0, f64::max);
    Ok(worst / delta)
}

/// k-means objective: sum over samples of the squared distance to the nearest center.
pub fn kmeans_objective(data: &DataMatrix, centers: &CenterSet) -> Result<f64> {
    if data.d() != centers.d() {
        return Err(ClusterError::DimensionMismatch {
            expected: centers.d(),
            got: data.d(),
        });
    }
    Ok((0..data.n())
        .map(|i| {
            let y = data.row(i);
            (0..centers.k())
                .map(|h| squared_distance(y, centers.center(h)))
                .fold(f64::INFINITY, f64::min)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(v: &[usize], k: usize) -> LabelVector {
        LabelVector::new(v.to_vec(), k).unwrap()
    }

    #[test]
    fn identity_and_relabeling_give_zero() {
        let z = lv(&[0, 1, 0, 1], 2);
        assert_eq!(misclustering_rate(&z, &z).unwrap().rate, 0.0);
        let swapped = lv(&[1, 0, 1, 0], 2);
        let a = misclustering_rate(&z, &swapped).unwrap();
        assert_eq!(a.rate, 0.0);
        assert_eq!(a.map, vec![1, 0]);
    }

    #[test]
    fn one_error_in_four() {
        // Enumerating the four maps {0,1}->{0,1}: identity 1 error, swap 3,
        // constant-0 2, constant-1 2.
        let z = lv(&[0, 0, 1, 1], 2);
        let zh = lv(&[0, 1, 1, 1], 2);
        assert_eq!(misclustering_rate(&z, &zh).unwrap().rate, 0.25);
    }

    #[test]
    fn map_may_be_non_injective() {
        // Estimated clusters {0},{1,2},{3}: both est 0 and est 1 are mostly truth 0.
        let z = lv(&[0, 0, 0, 1, 1, 2], 3);
        let zh = lv(&[0, 0, 1, 1, 2, 2], 3);
        let a = misclustering_rate(&z, &zh).unwrap();
        // est 0 -> 0 (2 hits), est 1 -> tie {0:1, 1:1} -> 0, est 2 -> tie {1:1,2:1} -> 1
        assert_eq!(a.map, vec![0, 0, 1]);
        assert!((a.rate - 2.0 / 6.0).abs() < 1e-15);
        let b = misclustering_rate_bijective(&z, &zh).unwrap();
        assert!(b.rate >= a.rate);
    }

    #[test]
    fn bijective_examples() {
        assert_eq!(
            misclustering_rate_bijective(&lv(&[0, 1], 2), &lv(&[1, 0], 2)).unwrap().rate,
            0.0
        );
        assert_eq!(
            misclustering_rate_bijective(&lv(&[0, 0, 1, 1], 2), &lv(&[0, 0, 0, 0], 2))
                .unwrap()
                .rate,
            0.5
        );
    }

    #[test]
    fn mismatches_are_errors() {
        assert_eq!(
            misclustering_rate(&lv(&[0, 1], 2), &lv(&[0], 2)),
            Err(ClusterError::LengthMismatch { expected: 2, got: 1 })
        );
        assert_eq!(
            misclustering_rate(&lv(&[0, 1], 2), &lv(&[0, 1], 3)),
            Err(ClusterError::ClusterCountMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn groupwise_examples() {
        let z = lv(&[0, 0, 0, 0, 1, 1, 1, 1], 2);
        assert_eq!(groupwise_rate(&z, &z).unwrap().rate, 0.0);

        // estimated {1,2,3,5},{4,6,7,8} in 1-based item ids
        let zh = lv(&[0, 0, 0, 1, 0, 1, 1, 1], 2);
        assert_eq!(groupwise_rate(&z, &zh).unwrap().rate, 0.25);

        let all_one = lv(&[0; 8], 2);
        let g = groupwise_rate(&z, &all_one).unwrap();
        assert_eq!(g.rate, 1.0);
        assert_eq!(g.empty_clusters, vec![1]);
        assert!(g.is_degenerate());
    }

    #[test]
    fn center_error_examples() {
        let truth = CenterSet::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(center_error(&truth, &truth, &[0, 1]).unwrap(), 0.0);
        let est = CenterSet::from_rows(&[vec![0.1], vec![1.0]]).unwrap();
        assert!((center_error(&truth, &est, &[0, 1]).unwrap() - 0.1).abs() < 1e-15);

        let coincident = CenterSet::from_rows(&[vec![2.0], vec![2.0]]).unwrap();
        assert_eq!(
            center_error(&coincident, &est, &[0, 1]),
            Err(ClusterError::CoincidentCenters)
        );
    }

    #[test]
    fn objective_examples() {
        let data = DataMatrix::from_rows(&[vec![2.0, 0.0]]).unwrap();
        let c = CenterSet::from_rows(&[vec![0.0, 0.0]]).unwrap();
        assert_eq!(kmeans_objective(&data, &c).unwrap(), 4.0);

        let rows = vec![vec![1.0, 2.0], vec![-3.0, 0.5]];
        let data = DataMatrix::from_rows(&rows).unwrap();
        let c = CenterSet::from_rows(&rows).unwrap();
        assert_eq!(kmeans_objective(&data, &c).unwrap(), 0.0);

        let wrong_d = CenterSet::from_rows(&[vec![0.0]]).unwrap();
        assert!(kmeans_objective(&data, &wrong_d).is_err());
    }
}
