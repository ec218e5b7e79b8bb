//! Sparse 0/1 matrices and undirected graphs in compressed-row form.

use ndarray::{Array2, ArrayView2};

use crate::error::{ClusterError, Result};
use crate::spectral::LinearOperator;

/// Rectangular 0/1 matrix stored as sorted column indices per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
}

impl BinaryMatrix {
    /// Rows given as column index lists; indices are sorted and must be
    /// distinct and `< n_cols`.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(ClusterError::InvalidParameter(format!(
                    "duplicate entry ({i}, {}) in sparse matrix",
                    w[0]
                )));
            }
            if let Some(&j) = row.last().filter(|&&j| j >= n_cols) {
                return Err(ClusterError::InvalidParameter(format!(
                    "column {j} out of range for {n_cols} columns"
                )));
            }
            cols.extend(row.into_iter().map(|j| j as u32));
            row_ptr.push(cols.len());
        }
        Ok(Self {
            n_rows: row_ptr.len() - 1,
            n_cols,
            row_ptr,
            cols,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Column indices of the ones in row `i`, ascending.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn row_count(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&(j as u32)).is_ok()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.n_rows, self.n_cols));
        for i in 0..self.n_rows {
            for &j in self.row(i) {
                m[[i, j as usize]] = 1.0;
            }
        }
        m
    }

    pub fn is_symmetric(&self) -> bool {
        self.n_rows == self.n_cols
            && (0..self.n_rows).all(|i| self.row(i).iter().all(|&j| self.get(j as usize, i)))
    }
}

impl LinearOperator for BinaryMatrix {
    fn nrows(&self) -> usize {
        self.n_rows
    }

    fn ncols(&self) -> usize {
        self.n_cols
    }

    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_rows, x.ncols()));
        for (i, mut out_row) in out.rows_mut().into_iter().enumerate() {
            for &j in self.row(i) {
                out_row += &x.row(j as usize);
            }
        }
        out
    }

    fn apply_transpose(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_cols, x.ncols()));
        for i in 0..self.n_rows {
            let xi = x.row(i);
            for &j in self.row(i) {
                let mut row = out.row_mut(j as usize);
                row += &xi;
            }
        }
        out
    }
}

/// Undirected simple graph: symmetric 0/1 adjacency with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix(BinaryMatrix);

impl AdjacencyMatrix {
    /// Build from 0-based undirected edges. Self-loops and repeated edges
    /// (in either orientation) are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut rows = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(ClusterError::InvalidParameter(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(ClusterError::InvalidParameter(format!("self-loop at node {u}")));
            }
            rows[u].push(v);
            rows[v].push(u);
        }
        BinaryMatrix::from_rows(n, rows)
            .map(Self)
            .map_err(|_| ClusterError::InvalidParameter("duplicate edge".into()))
    }

    /// Wrap a matrix already known to be symmetric with zero diagonal.
    pub fn from_symmetric(matrix: BinaryMatrix) -> Result<Self> {
        if !matrix.is_symmetric() {
            return Err(ClusterError::InvalidParameter("adjacency matrix must be symmetric".into()));
        }
        if (0..matrix.n_rows()).any(|i| matrix.get(i, i)) {
            return Err(ClusterError::InvalidParameter("adjacency matrix must have zero diagonal".into()));
        }
        Ok(Self(matrix))
    }

    pub fn n(&self) -> usize {
        self.0.n_rows()
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        self.0.row(i)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.0.row_count(i)
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.degree(i)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.0.nnz() / 2
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.0.get(i, j)
    }

    /// Edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    pub fn as_binary(&self) -> &BinaryMatrix {
        &self.0
    }

    pub fn to_dense(&self) -> Array2<f64> {
        self.0.to_dense()
    }
}

impl LinearOperator for AdjacencyMatrix {
    fn nrows(&self) -> usize {
        self.n()
    }

    fn ncols(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.0.apply(x)
    }

    fn apply_transpose(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        // symmetric
        self.0.apply(x)
    }
}
