//! Surface differential operators in extrinsic form.
//!
//! Every operator is a linear combination of the nine Euclidean derivative
//! weights of a stencil, so it comes out as one sparse row over the stencil
//! support (centre first).

use num_complex::Complex64;

use crate::geometry::SurfaceCloud;
use crate::stencil::{Derivative, StencilWeights};
use crate::Vec3;

/// Sparse row over a stencil support.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorRow {
    pub indices: Vec<usize>,
    pub coeffs: Vec<f64>,
}

impl OperatorRow {
    fn combine(stencil: &StencilWeights, terms: &[(Derivative, f64)]) -> Self {
        let indices: Vec<usize> = stencil.support().collect();
        let mut coeffs = vec![0.0; indices.len()];
        for &(d, factor) in terms {
            if factor == 0.0 {
                continue;
            }
            for (c, w) in coeffs.iter_mut().zip(stencil.weights(d)) {
                *c += factor * w;
            }
        }
        Self { indices, coeffs }
    }

    /// Evaluates the row on a real nodal field.
    pub fn apply(&self, values: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.coeffs)
            .map(|(&j, c)| c * values[j])
            .sum()
    }

    /// Evaluates the row on a complex nodal field.
    pub fn apply_complex(&self, values: &[Complex64]) -> Complex64 {
        self.indices
            .iter()
            .zip(&self.coeffs)
            .map(|(&j, &c)| values[j] * c)
            .sum()
    }

    /// Sum of coefficients; zero for any consistent derivative operator.
    pub fn coefficient_sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for c in &mut self.coeffs {
            *c *= factor;
        }
        self
    }
}

/// `lap_S u = -H (n . grad u) + sum_i (1 - n_i^2) u_ii - 2 sum_{i<j} n_i n_j u_ij`.
pub fn laplace_beltrami_row(stencil: &StencilWeights, normal: &Vec3, hs: f64) -> OperatorRow {
    use Derivative::*;
    let n = normal;
    OperatorRow::combine(
        stencil,
        &[
            (X1, -hs * n[0]),
            (X2, -hs * n[1]),
            (X3, -hs * n[2]),
            (X1X1, 1.0 - n[0] * n[0]),
            (X2X2, 1.0 - n[1] * n[1]),
            (X3X3, 1.0 - n[2] * n[2]),
            (X1X2, -2.0 * n[0] * n[1]),
            (X1X3, -2.0 * n[0] * n[2]),
            (X2X3, -2.0 * n[1] * n[2]),
        ],
    )
}

/// Rows of `(I - n n^T) grad u`, one per Euclidean component.
pub fn surface_gradient_rows(stencil: &StencilWeights, normal: &Vec3) -> [OperatorRow; 3] {
    use Derivative::*;
    let n = normal;
    [0, 1, 2].map(|i| {
        let p = |j: usize| if i == j { 1.0 - n[i] * n[j] } else { -n[i] * n[j] };
        OperatorRow::combine(stencil, &[(X1, p(0)), (X2, p(1)), (X3, p(2))])
    })
}

/// Conormal derivative `nu . grad u` for a tangent unit vector `nu`.
pub fn conormal_derivative_row(stencil: &StencilWeights, conormal: &Vec3) -> OperatorRow {
    use Derivative::*;
    OperatorRow::combine(
        stencil,
        &[(X1, conormal[0]), (X2, conormal[1]), (X3, conormal[2])],
    )
}

/// Laplace-Beltrami row of node `i` using the cloud's normal and `H_S`.
pub fn laplace_beltrami_at(cloud: &SurfaceCloud, stencil: &StencilWeights) -> OperatorRow {
    let i = stencil.center;
    laplace_beltrami_row(stencil, &cloud.normals[i], cloud.hs_values[i])
}

/// Applies the Laplace-Beltrami operator to a real field at every node.
pub fn apply_laplace_beltrami(cloud: &SurfaceCloud, stencils: &[StencilWeights], values: &[f64]) -> Vec<f64> {
    stencils
        .iter()
        .map(|s| laplace_beltrami_at(cloud, s).apply(values))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_sphere;
    use crate::stencil::build_all_stencils;

    #[test]
    fn sphere_harmonics_are_eigenfunctions() {
        let cloud = sample_sphere(2000).unwrap();
        let stencils = build_all_stencils(&cloud, 40).unwrap();
        let x1: Vec<f64> = cloud.positions.iter().map(|p| p[0]).collect();
        let x1x2: Vec<f64> = cloud.positions.iter().map(|p| p[0] * p[1]).collect();
        let lap1 = apply_laplace_beltrami(&cloud, &stencils, &x1);
        let lap2 = apply_laplace_beltrami(&cloud, &stencils, &x1x2);
        let mut e1 = 0.0f64;
        let mut e2 = 0.0f64;
        for i in 0..cloud.len() {
            e1 = e1.max((lap1[i] + 2.0 * x1[i]).abs());
            e2 = e2.max((lap2[i] + 6.0 * x1x2[i]).abs());
        }
        assert!(e1 < 1e-6, "degree 1: {e1}");
        assert!(e2 < 1e-6, "degree 2: {e2}");
    }

    #[test]
    fn rows_annihilate_constants() {
        let cloud = sample_sphere(500).unwrap();
        let stencils = build_all_stencils(&cloud, 40).unwrap();
        for s in &stencils {
            let row = laplace_beltrami_at(&cloud, s);
            let l1: f64 = row.coeffs.iter().map(|c| c.abs()).sum();
            assert!(row.coefficient_sum().abs() <= 1e-10 * l1);
            assert_eq!(row.indices[0], s.center);
        }
    }

    #[test]
    fn surface_gradient_is_tangent() {
        let cloud = sample_sphere(800).unwrap();
        let stencils = build_all_stencils(&cloud, 40).unwrap();
        let f: Vec<f64> = cloud.positions.iter().map(|p| p[2] + p[0] * p[1]).collect();
        for s in &stencils {
            let n = cloud.normals[s.center];
            let g = surface_gradient_rows(s, &n).map(|r| r.apply(&f));
            let g = Vec3::new(g[0], g[1], g[2]);
            assert!(g.dot(&n).abs() < 1e-9);
        }
    }

    #[test]
    fn conormal_derivative_of_linear_field() {
        let cloud = sample_sphere(800).unwrap();
        let stencils = build_all_stencils(&cloud, 40).unwrap();
        let f: Vec<f64> = cloud.positions.iter().map(|p| 2.0 * p[0] - p[1]).collect();
        let s = &stencils[17];
        let n = cloud.normals[s.center];
        let nu = n.cross(&Vec3::z()).normalize();
        let d = conormal_derivative_row(s, &nu).apply(&f);
        assert!((d - (2.0 * nu[0] - nu[1])).abs() < 1e-8);
    }
}
