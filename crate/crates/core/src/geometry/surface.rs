//! Implicit surfaces, unit normals and the mean-curvature term `H_S`.

use nalgebra::Matrix3;

use crate::{GfdmError, Result, Vec3};

/// A surface given as the zero set of a level-set function.
///
/// Only `level_set` is required; the gradient falls back to central
/// differences with step [`ImplicitSurface::fd_step`].
pub trait ImplicitSurface: Send + Sync {
    fn name(&self) -> &str;

    fn level_set(&self, x: &Vec3) -> f64;

    fn gradient(&self, x: &Vec3) -> Vec3 {
        central_difference_gradient(|p| self.level_set(p), x, self.fd_step())
    }

    /// Closed-form `H_S` when the surface family has one.
    fn analytic_hs(&self, _x: &Vec3) -> Option<f64> {
        None
    }

    /// Characteristic length used for tolerances and finite-difference steps.
    fn scale(&self) -> f64 {
        1.0
    }

    fn fd_step(&self) -> f64 {
        1e-5 * self.scale()
    }
}

pub(crate) fn central_difference_gradient<F: Fn(&Vec3) -> f64>(f: F, x: &Vec3, h: f64) -> Vec3 {
    let mut g = Vec3::zeros();
    for k in 0..3 {
        let mut xp = *x;
        let mut xm = *x;
        xp[k] += h;
        xm[k] -= h;
        g[k] = (f(&xp) - f(&xm)) / (2.0 * h);
    }
    g
}

/// Unit normal `grad / |grad|` of the level set at `x`.
pub fn normal_at(surface: &dyn ImplicitSurface, x: &Vec3) -> Result<Vec3> {
    let g = surface.gradient(x);
    let norm = g.norm();
    if !(norm >= 1e-14 * surface.scale()) {
        return Err(GfdmError::DegenerateGradient {
            x: x[0],
            y: x[1],
            z: x[2],
            norm,
        });
    }
    Ok(g / norm)
}

/// `H_S = tr(J(n) (I - n n^T))`, analytic when available.
pub fn mean_curvature_term(surface: &dyn ImplicitSurface, x: &Vec3) -> Result<f64> {
    match surface.analytic_hs(x) {
        Some(h) => Ok(h),
        None => mean_curvature_fd(surface, x, surface.fd_step()),
    }
}

/// Finite-difference `H_S`: central differences of the normal field with step `h`.
pub fn mean_curvature_fd(surface: &dyn ImplicitSurface, x: &Vec3, h: f64) -> Result<f64> {
    let n = normal_at(surface, x)?;
    // jac[(i, j)] = d n_i / d x_j
    let mut jac = Matrix3::zeros();
    for j in 0..3 {
        let mut xp = *x;
        let mut xm = *x;
        xp[j] += h;
        xm[j] -= h;
        let dn = (normal_at(surface, &xp)? - normal_at(surface, &xm)?) / (2.0 * h);
        jac.set_column(j, &dn);
    }
    let projector = Matrix3::identity() - n * n.transpose();
    Ok((jac * projector).trace())
}

#[derive(Debug, Clone)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

impl Sphere {
    pub fn unit() -> Self {
        Self {
            center: Vec3::zeros(),
            radius: 1.0,
        }
    }

    pub fn new(radius: f64) -> Self {
        Self {
            center: Vec3::zeros(),
            radius,
        }
    }
}

impl ImplicitSurface for Sphere {
    fn name(&self) -> &str {
        "sphere"
    }

    fn level_set(&self, x: &Vec3) -> f64 {
        (x - self.center).norm_squared() - self.radius * self.radius
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        2.0 * (x - self.center)
    }

    fn analytic_hs(&self, _x: &Vec3) -> Option<f64> {
        Some(2.0 / self.radius)
    }

    fn scale(&self) -> f64 {
        self.radius
    }
}

/// Circular cylinder `x1^2 + x3^2 = R^2` with its axis along `x2`.
#[derive(Debug, Clone)]
pub struct Cylinder {
    pub radius: f64,
}

impl ImplicitSurface for Cylinder {
    fn name(&self) -> &str {
        "cylinder"
    }

    fn level_set(&self, x: &Vec3) -> f64 {
        x[0] * x[0] + x[2] * x[2] - self.radius * self.radius
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        Vec3::new(2.0 * x[0], 0.0, 2.0 * x[2])
    }

    fn analytic_hs(&self, _x: &Vec3) -> Option<f64> {
        Some(1.0 / self.radius)
    }

    fn scale(&self) -> f64 {
        self.radius
    }
}

/// The plane `x3 = height`.
#[derive(Debug, Clone, Default)]
pub struct Plane {
    pub height: f64,
}

impl ImplicitSurface for Plane {
    fn name(&self) -> &str {
        "plane"
    }

    fn level_set(&self, x: &Vec3) -> f64 {
        x[2] - self.height
    }

    fn gradient(&self, _x: &Vec3) -> Vec3 {
        Vec3::new(0.0, 0.0, 1.0)
    }

    fn analytic_hs(&self, _x: &Vec3) -> Option<f64> {
        Some(0.0)
    }
}

/// Closed surface on which the product of distances to four foci is constant.
///
/// With foci `(+-1, 0, 0)`, `(0, +-1, 0)` and product `1.1` this is the
/// four-lobed benchmark surface used by the `cdp` case.
#[derive(Debug, Clone)]
pub struct ConstantDistanceProduct {
    pub foci: [Vec3; 4],
    pub product: f64,
}

impl Default for ConstantDistanceProduct {
    fn default() -> Self {
        Self {
            foci: [
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(-1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, -1.0, 0.0),
            ],
            product: 1.1,
        }
    }
}

impl ImplicitSurface for ConstantDistanceProduct {
    fn name(&self) -> &str {
        "constant-distance-product"
    }

    fn level_set(&self, x: &Vec3) -> f64 {
        self.foci.iter().map(|f| (x - f).norm()).product::<f64>() - self.product
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        let dist: Vec<f64> = self.foci.iter().map(|f| (x - f).norm()).collect();
        let prod: f64 = dist.iter().product();
        self.foci
            .iter()
            .zip(&dist)
            .map(|(f, d)| (x - f) * (prod / (d * d)))
            .sum()
    }
}

/// Rotation about the `x2` axis, `X = J x` with
/// `J = [[cos a, 0, -sin a], [0, 1, 0], [sin a, 0, cos a]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationAboutX2 {
    pub alpha: f64,
    pub matrix: Matrix3<f64>,
}

impl RotationAboutX2 {
    pub fn new(alpha: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        #[rustfmt::skip]
        let matrix = Matrix3::new(
            c,   0.0, -s,
            0.0, 1.0, 0.0,
            s,   0.0, c,
        );
        Self { alpha, matrix }
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.matrix * x
    }

    pub fn apply_inverse(&self, x: &Vec3) -> Vec3 {
        self.matrix.transpose() * x
    }
}
