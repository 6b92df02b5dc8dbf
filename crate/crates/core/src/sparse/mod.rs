//! Complex sparse matrices and a direct solver.
//!
//! [`CscMatrix`] is built from (possibly duplicated) triplets. [`SparseLu`]
//! factors it with a fill-reducing nested-dissection column order and
//! left-looking threshold partial pivoting.

mod lu;
mod ordering;

use num_complex::Complex64;

use crate::{GfdmError, Result};

pub use lu::{SolveReport, SparseLu, PIVOT_THRESHOLD};
pub use ordering::nested_dissection;

/// Compressed sparse column matrix with sorted, unique row indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<Complex64>,
}

impl CscMatrix {
    /// Builds a matrix from triplets; duplicates are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, Complex64)],
    ) -> Result<Self> {
        let mut counts = vec![0usize; n_cols + 1];
        for &(r, c, _) in triplets {
            if r >= n_rows || c >= n_cols {
                return Err(GfdmError::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
            counts[c + 1] += 1;
        }
        for c in 0..n_cols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut rows = vec![0usize; triplets.len()];
        let mut vals = vec![Complex64::default(); triplets.len()];
        for &(r, c, v) in triplets {
            rows[next[c]] = r;
            vals[next[c]] = v;
            next[c] += 1;
        }
        let mut col_ptr = Vec::with_capacity(n_cols + 1);
        let mut row_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        col_ptr.push(0);
        let mut scratch: Vec<(usize, Complex64)> = Vec::new();
        for c in 0..n_cols {
            scratch.clear();
            scratch.extend((counts[c]..counts[c + 1]).map(|p| (rows[p], vals[p])));
            scratch.sort_by_key(|&(r, _)| r);
            for &(r, v) in &scratch {
                if row_idx.len() > col_ptr[c] && *row_idx.last().unwrap() == r {
                    *values.last_mut().unwrap() += v;
                } else {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Ok(Self {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        match self.row_idx[range.clone()].binary_search(&r) {
            Ok(p) => self.values[range.start + p],
            Err(_) => Complex64::default(),
        }
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![Complex64::default(); self.n_rows];
        for (c, &xc) in x.iter().enumerate() {
            if xc == Complex64::default() {
                continue;
            }
            for (r, v) in self.column(c) {
                y[r] += v * xc;
            }
        }
        y
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut sums = vec![0.0; self.n_rows];
        for (&r, v) in self.row_idx.iter().zip(&self.values) {
            sums[r] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Multiplies row `r` by `factors[r]`.
    pub fn scale_rows(&mut self, factors: &[f64]) {
        for (r, v) in self.row_idx.iter().zip(self.values.iter_mut()) {
            *v *= factors[*r];
        }
    }

    /// Row-wise entries as `(row, col, value)` in row-major order.
    pub fn to_row_major(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out: Vec<(usize, usize, Complex64)> = (0..self.n_cols)
            .flat_map(|c| self.column(c).map(move |(r, v)| (r, c, v)))
            .collect();
        out.sort_by_key(|&(r, c, _)| (r, c));
        out
    }
}

/// Infinity norm of a complex vector.
pub fn norm_inf(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Factors and solves `A x = b` in one step.
pub fn solve(a: &CscMatrix, b: &[Complex64]) -> Result<(Vec<Complex64>, SolveReport)> {
    SparseLu::factor(a)?.solve_refined(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn duplicates_are_summed() {
        let m = CscMatrix::from_triplets(2, 2, &[(0, 0, c(1.0, 0.0)), (1, 0, c(2.0, 0.0)), (0, 0, c(0.5, 1.0))])
            .unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), c(1.5, 1.0));
        assert_eq!(m.get(1, 0), c(2.0, 0.0));
        assert_eq!(m.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        assert!(CscMatrix::from_triplets(2, 2, &[(2, 0, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn mul_vec_matches_dense() {
        let t = [(0, 0, c(2.0, 0.0)), (0, 1, c(0.0, 1.0)), (1, 1, c(3.0, -1.0)), (2, 0, c(1.0, 1.0))];
        let m = CscMatrix::from_triplets(3, 2, &t).unwrap();
        let y = m.mul_vec(&[c(1.0, 0.0), c(0.0, 2.0)]);
        assert_eq!(y, vec![c(0.0, 0.0), c(2.0, 6.0), c(1.0, 1.0)]);
        assert_eq!(m.norm_inf(), 2.0f64.max(10f64.sqrt()));
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let a = CscMatrix::identity(5);
        let b: Vec<Complex64> = (0..5).map(|i| c(i as f64, -(i as f64))).collect();
        let (x, report) = solve(&a, &b).unwrap();
        assert_eq!(x, b);
        assert_eq!(report.relative_residual, 0.0);
    }
}
