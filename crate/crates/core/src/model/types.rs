use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{ClusterError, Result};

/// n×d observation matrix, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(Array2<f64>);

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        check_finite_nonempty(&values)?;
        Ok(Self(values))
    }

    /// Build from row vectors. All rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows_to_array(rows)?)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn d(&self) -> usize {
        self.0.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub(crate) fn from_array_unchecked(values: Array2<f64>) -> Self {
        Self(values)
    }
}

/// k×d matrix of cluster centers.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet(Array2<f64>);

impl CenterSet {
    pub fn new(centers: Array2<f64>) -> Result<Self> {
        check_finite_nonempty(&centers)?;
        Ok(Self(centers))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows_to_array(rows)?)
    }

    pub fn k(&self) -> usize {
        self.0.nrows()
    }

    pub fn d(&self) -> usize {
        self.0.ncols()
    }

    pub fn center(&self, h: usize) -> ArrayView1<'_, f64> {
        self.0.row(h)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    /// Minimum pairwise Euclidean distance, or `None` when k < 2.
    pub fn min_separation(&self) -> Option<f64> {
        pairwise_distances(&self.0).into_iter().reduce(f64::min)
    }

    pub(crate) fn from_array_unchecked(centers: Array2<f64>) -> Self {
        Self(centers)
    }
}

pub(crate) fn pairwise_distances(m: &Array2<f64>) -> Vec<f64> {
    let k = m.nrows();
    let mut out = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for g in 0..k {
        for h in (g + 1)..k {
            out.push(squared_distance(m.row(g), m.row(h)).sqrt());
        }
    }
    out
}

#[inline]
pub(crate) fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn rows_to_array(rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    let mut flat = Vec::with_capacity(n * d);
    for row in rows {
        if row.len() != d {
            return Err(ClusterError::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        flat.extend_from_slice(row);
    }
    Array2::from_shape_vec((n, d), flat).map_err(|e| ClusterError::InvalidParameter(e.to_string()))
}

fn check_finite_nonempty(m: &Array2<f64>) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(ClusterError::EmptyMatrix);
    }
    if let Some(((row, col), _)) = m.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(ClusterError::NonFinite { row, col });
    }
    Ok(())
}

/// Assignment of n items to clusters `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelVector {
    labels: Vec<usize>,
    k: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(ClusterError::InvalidParameter("k must be at least 1".into()));
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= k) {
            return Err(ClusterError::LabelOutOfRange { label, k });
        }
        Ok(Self { labels, k })
    }

    /// Infers k as `max label + 1`.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(1, |m| m + 1);
        Self::new(labels, k)
    }

    pub(crate) fn from_vec_unchecked(labels: Vec<usize>, k: usize) -> Self {
        debug_assert!(labels.iter().all(|&l| l < k));
        Self { labels, k }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.labels
    }

    pub fn get(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Per-cluster counts.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Same labels viewed with a larger cluster count.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(self.labels.clone(), k)
    }

    /// Apply a label map `h -> map[h]` into `0..k_out`.
    pub fn relabel(&self, map: &[usize], k_out: usize) -> Result<Self> {
        if map.len() != self.k {
            return Err(ClusterError::LengthMismatch {
                expected: self.k,
                got: map.len(),
            });
        }
        Self::new(self.labels.iter().map(|&l| map[l]).collect(), k_out)
    }

    /// Number of positions where the two vectors disagree.
    pub fn hamming(&self, other: &LabelVector) -> usize {
        self.labels
            .iter()
            .zip(&other.labels)
            .filter(|(a, b)| a != b)
            .count()
    }
}
