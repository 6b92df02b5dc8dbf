//! Generalized finite difference stencils.
//!
//! Each node gets weights for the 9 first and second Euclidean partial
//! derivatives from a spline-weighted least-squares fit of the second-order
//! Taylor expansion over its `m` nearest admissible neighbours. Offsets are
//! scaled by the support radius `d_max` before the fit, and the weighted
//! design matrix is inverted with a truncated SVD, so surface-bound clouds
//! whose moment matrix is rank deficient still get consistent weights.

use nalgebra::{DMatrix, SMatrix, SVector};

use crate::geometry::{Region, SurfaceCloud};
use crate::spatial::KdTree;
use crate::{par, GfdmError, Result, Vec3};

/// Default stencil size.
pub const DEFAULT_STENCIL_SIZE: usize = 40;

/// Relative cutoff on the moment-matrix eigenvalues (`sigma^2 / sigma_max^2`).
pub const SINGULAR_VALUE_CUTOFF: f64 = 1e-10;

/// Index of a partial derivative in [`StencilWeights`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Derivative {
    X1,
    X2,
    X3,
    X1X1,
    X2X2,
    X3X3,
    X1X2,
    X1X3,
    X2X3,
}

impl Derivative {
    pub const ALL: [Derivative; 9] = [
        Derivative::X1,
        Derivative::X2,
        Derivative::X3,
        Derivative::X1X1,
        Derivative::X2X2,
        Derivative::X3X3,
        Derivative::X1X2,
        Derivative::X1X3,
        Derivative::X2X3,
    ];

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn order(self) -> usize {
        if self.code() < 3 {
            1
        } else {
            2
        }
    }
}

/// Fourth-order spline weight on `[0, d_max]`.
pub fn spline_weight(d: f64, d_max: f64) -> f64 {
    if d > d_max {
        return 0.0;
    }
    let q = d / d_max;
    let q2 = q * q;
    1.0 - 6.0 * q2 + 8.0 * q2 * q - 3.0 * q2 * q2
}

/// Taylor monomials `(h, k, l, h^2/2, k^2/2, l^2/2, hk, hl, kl)` of an offset.
pub fn taylor_terms(o: &Vec3) -> SVector<f64, 9> {
    let (h, k, l) = (o[0], o[1], o[2]);
    SVector::<f64, 9>::from_column_slice(&[
        h,
        k,
        l,
        0.5 * h * h,
        0.5 * k * k,
        0.5 * l * l,
        h * k,
        h * l,
        k * l,
    ])
}

/// `M = sum_j w_j^2 p_j p_j^T` over scaled offsets.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub entries: SMatrix<f64, 9, 9>,
    pub scale: f64,
}

impl MomentMatrix {
    pub fn from_offsets(offsets: &[Vec3]) -> Self {
        let scale = offsets.iter().map(|o| o.norm()).fold(0.0, f64::max);
        let mut entries = SMatrix::<f64, 9, 9>::zeros();
        for o in offsets {
            let w = spline_weight(o.norm(), scale);
            let p = taylor_terms(&(o / scale));
            entries += (w * w) * p * p.transpose();
        }
        Self { entries, scale }
    }
}

/// Derivative weights at one node. Vector element 0 is the centre weight,
/// element `j + 1` belongs to `neighbors[j]`.
#[derive(Debug, Clone)]
pub struct StencilWeights {
    pub center: usize,
    pub neighbors: Vec<usize>,
    pub first_order: [Vec<f64>; 3],
    /// `x1x1, x2x2, x3x3, x1x2, x1x3, x2x3`.
    pub second_order: [Vec<f64>; 6],
    pub rank: usize,
    pub cond_estimate: f64,
}

impl StencilWeights {
    pub fn weights(&self, d: Derivative) -> &[f64] {
        let c = d.code();
        if c < 3 {
            &self.first_order[c]
        } else {
            &self.second_order[c - 3]
        }
    }

    /// Node indices in weight order: centre first.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.center).chain(self.neighbors.iter().copied())
    }

    /// Applies all 9 derivative weights to nodal values of a field.
    pub fn apply<F: Fn(usize) -> f64>(&self, values: F) -> [f64; 9] {
        let u: Vec<f64> = self.support().map(&values).collect();
        Derivative::ALL.map(|d| self.weights(d).iter().zip(&u).map(|(w, v)| w * v).sum())
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == 9
    }
}

/// Which nodes may enter a stencil centred on a node of the given region.
pub fn admissible(cloud: &SurfaceCloud, center: usize, candidate: usize) -> bool {
    candidate != center && cloud.region[candidate] == cloud.region[center]
}

/// The `m` nearest nodes on the centre's own material side.
pub fn knn_neighbors(
    cloud: &SurfaceCloud,
    tree: &KdTree,
    center: usize,
    m: usize,
) -> Result<Vec<usize>> {
    let found = tree.nearest(&cloud.positions[center], m, |j| admissible(cloud, center, j));
    if found.len() < m {
        return Err(GfdmError::InsufficientNeighbors {
            center,
            requested: m,
            available: found.len(),
        });
    }
    Ok(found)
}

/// Weights from explicit offsets `x_j - x_center`.
pub fn stencil_from_offsets(center: usize, neighbors: Vec<usize>, offsets: &[Vec3]) -> Result<StencilWeights> {
    let m = offsets.len();
    assert_eq!(m, neighbors.len());
    let d_max = offsets.iter().map(|o| o.norm()).fold(0.0, f64::max);
    if !(d_max > 0.0) {
        return Err(GfdmError::SingularStencil { center, rank: 0 });
    }
    let weights: Vec<f64> = offsets.iter().map(|o| spline_weight(o.norm(), d_max)).collect();
    let mut design = DMatrix::<f64>::zeros(m, 9);
    for (j, o) in offsets.iter().enumerate() {
        let p = taylor_terms(&(o / d_max));
        for c in 0..9 {
            design[(j, c)] = weights[j] * p[c];
        }
    }
    let (u, sigma, v) = jacobi_svd(design);
    let s_max = sigma.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..sigma.len())
        .filter(|&k| sigma[k] * sigma[k] > SINGULAR_VALUE_CUTOFF * s_max * s_max)
        .collect();
    let rank = keep.len();
    if rank < 3 {
        return Err(GfdmError::SingularStencil { center, rank });
    }
    let s_min_kept = keep.iter().map(|&k| sigma[k]).fold(f64::INFINITY, f64::min);
    let cond_estimate = (s_max / s_min_kept).powi(2);

    // pinv = V diag(1/sigma) U^T, restricted to kept singular values.
    let mut rows = vec![vec![0.0; m + 1]; 9];
    for (c, row) in rows.iter_mut().enumerate() {
        let unscale = if c < 3 { d_max } else { d_max * d_max };
        let mut center_weight = 0.0;
        for j in 0..m {
            let mut g = 0.0;
            for &k in &keep {
                g += v[(c, k)] * u[(j, k)] / sigma[k];
            }
            let w = g * weights[j] / unscale;
            row[j + 1] = w;
            center_weight -= w;
        }
        row[0] = center_weight;
    }
    let mut it = rows.into_iter();
    let first_order = [(); 3].map(|_| it.next().unwrap());
    let second_order = [(); 6].map(|_| it.next().unwrap());
    Ok(StencilWeights {
        center,
        neighbors,
        first_order,
        second_order,
        rank,
        cond_estimate,
    })
}

/// Thin SVD `a = u diag(sigma) v^T` of a tall matrix by one-sided Jacobi rotations.
fn jacobi_svd(mut a: DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let (x, y) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * x - s * y;
                        mat[(i, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..n).map(|k| a.column(k).norm()).collect();
    for (k, &s) in sigma.iter().enumerate() {
        if s > 0.0 {
            a.column_mut(k).unscale_mut(s);
        }
    }
    (a, sigma, v)
}

/// Stencil at `center` over its `m` nearest admissible neighbours.
pub fn build_stencil(cloud: &SurfaceCloud, tree: &KdTree, center: usize, m: usize) -> Result<StencilWeights> {
    let neighbors = knn_neighbors(cloud, tree, center, m)?;
    let xc = cloud.positions[center];
    let offsets: Vec<Vec3> = neighbors.iter().map(|&j| cloud.positions[j] - xc).collect();
    stencil_from_offsets(center, neighbors, &offsets)
}

/// Stencils for every node of the cloud.
pub fn build_all_stencils(cloud: &SurfaceCloud, m: usize) -> Result<Vec<StencilWeights>> {
    let tree = KdTree::new(&cloud.positions);
    par::map_indices(cloud.len(), |i| build_stencil(cloud, &tree, i, m))
        .into_iter()
        .collect()
}

/// True when the stencil sits on nodes of one material side only.
pub fn single_region(cloud: &SurfaceCloud, stencil: &StencilWeights) -> Option<Region> {
    let r = cloud.region[stencil.center];
    stencil.neighbors.iter().all(|&j| cloud.region[j] == r).then_some(r)
}
