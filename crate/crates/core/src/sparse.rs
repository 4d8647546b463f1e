use nalgebra::DMatrix;
use rayon::prelude::*;

/// Compressed sparse column matrix. Columns are documents in the term–document
/// layout, so per-document access is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    /// Each column is a list of `(row, value)`; rows are sorted and zeros dropped.
    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, f64)>>) -> Self {
        let cols = columns.len();
        let mut col_ptr = Vec::with_capacity(cols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for mut col in columns {
            col.sort_by_key(|&(r, _)| r);
            for (r, v) in col {
                assert!(r < rows, "row {r} out of bounds for {rows} rows");
                if v != 0.0 {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let columns = (0..m.ncols())
            .map(|j| (0..m.nrows()).map(|i| (i, m[(i, j)])).collect())
            .collect();
        CscMatrix::from_columns(m.nrows(), columns)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn column_entries(&self, j: usize) -> Vec<(usize, f64)> {
        self.column(j).collect()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.cols).flat_map(move |j| self.column(j).map(move |(i, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// `self * rhs`, rows × rhs.ncols().
    pub fn mul_dense(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(self.cols, rhs.nrows());
        let mut out = DMatrix::zeros(self.rows, rhs.ncols());
        for j in 0..self.cols {
            for (i, v) in self.column(j) {
                for c in 0..rhs.ncols() {
                    out[(i, c)] += v * rhs[(j, c)];
                }
            }
        }
        out
    }

    /// `selfᵀ * rhs`, cols × rhs.ncols(). Rows of the output are independent
    /// dot products, so they are computed in parallel without changing results.
    pub fn tr_mul_dense(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(self.rows, rhs.nrows());
        let k = rhs.ncols();
        let rows: Vec<Vec<f64>> = (0..self.cols)
            .into_par_iter()
            .map(|j| {
                let mut acc = vec![0.0; k];
                for (i, v) in self.column(j) {
                    for (c, a) in acc.iter_mut().enumerate() {
                        *a += v * rhs[(i, c)];
                    }
                }
                acc
            })
            .collect();
        DMatrix::from_fn(self.cols, k, |r, c| rows[r][c])
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// A sparse vector with an explicit dimension, sorted by index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVec {
    pub dim: usize,
    pub entries: Vec<(usize, f64)>,
}

impl SparseVec {
    pub fn new(dim: usize, mut entries: Vec<(usize, f64)>) -> Self {
        entries.sort_by_key(|&(i, _)| i);
        entries.retain(|&(_, v)| v != 0.0);
        debug_assert!(entries.iter().all(|&(i, _)| i < dim));
        SparseVec { dim, entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &(i, x) in &self.entries {
            v[i] = x;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_match_dense() {
        let dense = DMatrix::from_row_slice(
            3,
            4,
            &[
                1.0, 0.0, 2.0, 0.0, //
                0.0, 0.0, 3.0, 1.0, //
                4.0, 5.0, 0.0, 0.0,
            ],
        );
        let sparse = CscMatrix::from_dense(&dense);
        assert_eq!(sparse.nnz(), 6);
        assert_eq!(sparse.to_dense(), dense);

        let rhs = DMatrix::from_fn(4, 2, |i, j| (i + 2 * j) as f64 - 1.5);
        assert_eq!(sparse.mul_dense(&rhs), &dense * &rhs);
        let rhs_t = DMatrix::from_fn(3, 2, |i, j| (i * j) as f64 + 0.5);
        assert_eq!(sparse.tr_mul_dense(&rhs_t), dense.transpose() * &rhs_t);
    }
}
