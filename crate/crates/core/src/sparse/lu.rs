//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Each column of `L` and `U` is obtained from a sparse triangular solve
//! whose nonzero pattern is found by a depth-first reach through the columns
//! already factored. Rows are pre-scaled by powers of two, which keeps the
//! whole solve exactly linear in the right-hand side.

use num_complex::Complex64;

use super::{norm_inf, nested_dissection, CscMatrix};
use crate::{GfdmError, Result};

/// A diagonal entry is kept as pivot when it is at least this fraction of
/// the largest candidate in its column.
pub const PIVOT_THRESHOLD: f64 = 0.1;

/// Backward errors above this are flagged by [`SolveReport::residual_too_large`].
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

const MAX_REFINEMENT_STEPS: usize = 3;
const UNSET: usize = usize::MAX;

#[derive(Debug, Clone, Default)]
struct Factor {
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<Complex64>,
}

/// `P R A Q = L U` with `R` a power-of-two row scaling.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    col_order: Vec<usize>,
    pinv: Vec<usize>,
    row_scale: Vec<f64>,
    l: Factor,
    u: Factor,
}

/// Residual diagnostics of a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// `||A x - b||_inf / ||b||_inf`.
    pub relative_residual: f64,
    /// `||A x - b||_inf / (||A||_inf ||x||_inf + ||b||_inf)`.
    pub backward_error: f64,
    pub refinement_steps: usize,
    /// Stored entries of `L` and `U`.
    pub fill: usize,
}

impl SolveReport {
    pub fn residual_too_large(&self) -> bool {
        !(self.backward_error <= RESIDUAL_TOLERANCE)
    }
}

fn power_of_two_scale(max_abs: f64) -> f64 {
    2f64.powi(-(max_abs.log2().round() as i32))
}

impl SparseLu {
    pub fn factor(a: &CscMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(GfdmError::DimensionMismatch(format!(
                "cannot factor a {}x{} matrix",
                a.n_rows, a.n_cols
            )));
        }
        let n = a.n_cols;
        let mut row_max = vec![0.0f64; n];
        for (&r, v) in a.row_idx.iter().zip(&a.values) {
            row_max[r] = row_max[r].max(v.norm());
        }
        if let Some(r) = row_max.iter().position(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(GfdmError::SingularMatrix(r));
        }
        let row_scale: Vec<f64> = row_max.iter().map(|&m| power_of_two_scale(m)).collect();
        let mut scaled = a.clone();
        scaled.scale_rows(&row_scale);
        let col_order = nested_dissection(&scaled);

        let mut pinv = vec![UNSET; n];
        let mut l = Factor::default();
        let mut u = Factor::default();
        let mut x = vec![Complex64::default(); n];
        let mut xi = vec![0usize; n];
        let mut mark = vec![UNSET; n];
        let mut stack: Vec<(usize, usize)> = Vec::new();

        for (k, &col) in col_order.iter().enumerate() {
            l.ptr.push(l.idx.len());
            u.ptr.push(u.idx.len());

            let mut top = n;
            for (r, _) in scaled.column(col) {
                if mark[r] != k {
                    top = dfs(r, &l, &pinv, &mut mark, k, top, &mut xi, &mut stack);
                }
            }
            for (r, v) in scaled.column(col) {
                x[r] = v;
            }
            for &j in &xi[top..n] {
                let jj = pinv[j];
                if jj == UNSET {
                    continue;
                }
                let xj = x[j];
                if xj == Complex64::default() {
                    continue;
                }
                for p in l.ptr[jj] + 1..l.ptr[jj + 1] {
                    x[l.idx[p]] -= l.val[p] * xj;
                }
            }

            let mut ipiv = UNSET;
            let mut amax = -1.0;
            for &i in &xi[top..n] {
                if pinv[i] == UNSET {
                    let a = x[i].norm();
                    if a > amax {
                        amax = a;
                        ipiv = i;
                    }
                } else {
                    u.idx.push(pinv[i]);
                    u.val.push(x[i]);
                }
            }
            if ipiv == UNSET || !(amax > 0.0) || !amax.is_finite() {
                return Err(GfdmError::SingularMatrix(col));
            }
            if pinv[col] == UNSET && x[col].norm() >= PIVOT_THRESHOLD * amax {
                ipiv = col;
            }
            let pivot = x[ipiv];
            u.idx.push(k);
            u.val.push(pivot);
            pinv[ipiv] = k;
            l.idx.push(ipiv);
            l.val.push(Complex64::new(1.0, 0.0));
            for &i in &xi[top..n] {
                if pinv[i] == UNSET {
                    l.idx.push(i);
                    l.val.push(x[i] / pivot);
                }
                x[i] = Complex64::default();
            }
        }
        l.ptr.push(l.idx.len());
        u.ptr.push(u.idx.len());
        for r in &mut l.idx {
            *r = pinv[*r];
        }
        Ok(Self {
            n,
            col_order,
            pinv,
            row_scale,
            l,
            u,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of both factors.
    pub fn fill(&self) -> usize {
        self.l.idx.len() + self.u.idx.len()
    }

    /// Solves with the factors only, without refinement.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n);
        let mut y = vec![Complex64::default(); self.n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.pinv[i]] = bi * self.row_scale[i];
        }
        for k in 0..self.n {
            let yk = y[k];
            if yk == Complex64::default() {
                continue;
            }
            for p in self.l.ptr[k] + 1..self.l.ptr[k + 1] {
                y[self.l.idx[p]] -= self.l.val[p] * yk;
            }
        }
        for k in (0..self.n).rev() {
            let last = self.u.ptr[k + 1] - 1;
            y[k] /= self.u.val[last];
            let yk = y[k];
            if yk == Complex64::default() {
                continue;
            }
            for p in self.u.ptr[k]..last {
                y[self.u.idx[p]] -= self.u.val[p] * yk;
            }
        }
        let mut x = vec![Complex64::default(); self.n];
        for (k, &c) in self.col_order.iter().enumerate() {
            x[c] = y[k];
        }
        x
    }

    /// Solves `A x = b` with iterative refinement against the original matrix.
    pub fn solve_refined(&self, a: &CscMatrix, b: &[Complex64]) -> Result<(Vec<Complex64>, SolveReport)> {
        if a.n_rows != self.n || b.len() != self.n {
            return Err(GfdmError::DimensionMismatch(format!(
                "system of size {} with rhs of length {}",
                a.n_rows,
                b.len()
            )));
        }
        let residual = |x: &[Complex64]| -> Vec<Complex64> {
            let ax = a.mul_vec(x);
            b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
        };
        let mut x = self.solve(b);
        let mut r = residual(&x);
        let mut rnorm = norm_inf(&r);
        let mut steps = 0;
        while steps < MAX_REFINEMENT_STEPS && rnorm > 0.0 {
            let d = self.solve(&r);
            let candidate: Vec<Complex64> = x.iter().zip(&d).map(|(xi, di)| xi + di).collect();
            let r_new = residual(&candidate);
            let n_new = norm_inf(&r_new);
            if !(n_new < 0.5 * rnorm) {
                break;
            }
            x = candidate;
            r = r_new;
            rnorm = n_new;
            steps += 1;
        }
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(GfdmError::SingularMatrix(
                x.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()).unwrap(),
            ));
        }
        let bnorm = norm_inf(b);
        let relative_residual = if bnorm > 0.0 {
            rnorm / bnorm
        } else if rnorm == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let denom = a.norm_inf() * norm_inf(&x) + bnorm;
        let backward_error = if denom > 0.0 { rnorm / denom } else { 0.0 };
        Ok((
            x,
            SolveReport {
                relative_residual,
                backward_error,
                refinement_steps: steps,
                fill: self.fill(),
            },
        ))
    }
}

/// Depth-first reach from row `j0` through factored columns of `L`; pushes
/// nodes to `xi[..top]` in reverse postorder and returns the new `top`.
#[allow(clippy::too_many_arguments)]
fn dfs(
    j0: usize,
    l: &Factor,
    pinv: &[usize],
    mark: &mut [usize],
    stamp: usize,
    mut top: usize,
    xi: &mut [usize],
    stack: &mut Vec<(usize, usize)>,
) -> usize {
    let children = |j: usize| -> (usize, usize) {
        match pinv[j] {
            UNSET => (0, 0),
            jj => (l.ptr[jj] + 1, l.ptr[jj + 1]),
        }
    };
    mark[j0] = stamp;
    stack.push((j0, children(j0).0));
    while let Some(&(j, mut p)) = stack.last() {
        let end = children(j).1;
        let mut descended = false;
        while p < end {
            let i = l.idx[p];
            p += 1;
            if mark[i] != stamp {
                mark[i] = stamp;
                stack.last_mut().unwrap().1 = p;
                stack.push((i, children(i).0));
                descended = true;
                break;
            }
        }
        if !descended {
            stack.pop();
            top -= 1;
            xi[top] = j;
        }
    }
    top
}
