//! Closed surfaces with manufactured solutions.
//!
//! The source functions below are `lap_S u + k^2 u` of the exact fields; the
//! interior rows carry `mu (lap_S u + k^2 u) = mu lap_S u + rho omega^2 u`,
//! so the assembled right-hand side is `mu` times these values.

use num_complex::Complex64;

use super::{field_error, CaseResult, Timer};
use crate::assembly::{assemble_with, solve, AssemblyOptions, Discretization, HelmholtzProblem, MaterialParams, Source};
use crate::geometry::{sample_implicit, sample_sphere, ConstantDistanceProduct, ImplicitSampling, SurfaceCloud};
use crate::{Result, Vec3};

const AMPLITUDE: f64 = 1e-5;

/// `u = 1e-5 cos(k (x1 + x2 + x3))` on the unit sphere.
pub fn sphere_exact(x: &Vec3, omega: f64, c: f64) -> f64 {
    let k = omega / c;
    AMPLITUDE * (k * (x[0] + x[1] + x[2])).cos()
}

/// `lap_S u + k^2 u` for [`sphere_exact`].
pub fn sphere_source(x: &Vec3, omega: f64, c: f64) -> f64 {
    let k = omega / c;
    let s = x[0] + x[1] + x[2];
    let pairs = x[0] * x[1] + x[0] * x[2] + x[1] * x[2];
    AMPLITUDE * k * k * (2.0 * pairs - 1.0) * (k * s).cos() + 2.0 * AMPLITUDE * k * s * (k * s).sin()
}

/// `u = 1e-5 (cos x1 + cos x2 + cos x3)`.
pub fn cdp_exact(x: &Vec3) -> f64 {
    AMPLITUDE * (x[0].cos() + x[1].cos() + x[2].cos())
}

/// `lap_S u + k^2 u` for [`cdp_exact`], given the node's normal and `H_S`.
pub fn cdp_source(x: &Vec3, normal: &Vec3, hs: f64, omega: f64, c: f64) -> f64 {
    let k2 = (omega / c).powi(2);
    let mut g = 0.0;
    for i in 0..3 {
        g += (k2 + normal[i] * normal[i] - 1.0) * x[i].cos() + hs * normal[i] * x[i].sin();
    }
    AMPLITUDE * g
}

fn solve_manufactured<E: Fn(&Vec3) -> f64>(
    cloud: SurfaceCloud,
    m: usize,
    omega: f64,
    rhs: Vec<f64>,
    exact: E,
    options: AssemblyOptions,
    timer: Timer,
) -> Result<CaseResult> {
    let material = MaterialParams::epoxy();
    let disc = Discretization::new(&cloud, m)?;
    let mut problem = HelmholtzProblem::new(&cloud, material, omega);
    problem.source = Source::from_fn(cloud.len(), |i| Complex64::new(material.mu * rhs[i], 0.0));
    let system = assemble_with(&problem, &disc, options)?;
    let solution = solve(&system)?;
    let nodes: Vec<usize> = (0..cloud.len()).collect();
    let error = field_error(&solution.field, &cloud, exact, &nodes)?;
    Ok(CaseResult {
        n: cloud.len(),
        cloud,
        field: solution.field,
        global_error: Some(error),
        runtime_s: timer.seconds(),
        m,
        omega,
        report: solution.report,
        probes: Vec::new(),
        transmission_db: None,
        system,
    })
}

/// Manufactured solution on the unit sphere with `n` nodes.
pub fn case_sphere(n: usize, m: usize, omega: f64) -> Result<CaseResult> {
    let timer = Timer::start();
    let cloud = sample_sphere(n)?;
    run_sphere(cloud, m, omega, AssemblyOptions::default(), timer)
}

/// Manufactured solution on a given unit-sphere cloud.
pub fn case_sphere_on(cloud: SurfaceCloud, m: usize, omega: f64, options: AssemblyOptions) -> Result<CaseResult> {
    run_sphere(cloud, m, omega, options, Timer::start())
}

fn run_sphere(cloud: SurfaceCloud, m: usize, omega: f64, options: AssemblyOptions, timer: Timer) -> Result<CaseResult> {
    let c = MaterialParams::epoxy().c;
    let rhs: Vec<f64> = cloud.positions.iter().map(|x| sphere_source(x, omega, c)).collect();
    solve_manufactured(cloud, m, omega, rhs, |x| sphere_exact(x, omega, c), options, timer)
}

/// Manufactured solution on the constant-distance-product surface with about `n` nodes.
pub fn case_cdp(n: usize, m: usize, omega: f64) -> Result<CaseResult> {
    let timer = Timer::start();
    let cloud = sample_implicit(&ConstantDistanceProduct::default(), &ImplicitSampling::new(n))?;
    run_cdp(cloud, m, omega, AssemblyOptions::default(), timer)
}

pub fn case_cdp_on(cloud: SurfaceCloud, m: usize, omega: f64, options: AssemblyOptions) -> Result<CaseResult> {
    run_cdp(cloud, m, omega, options, Timer::start())
}

fn run_cdp(cloud: SurfaceCloud, m: usize, omega: f64, options: AssemblyOptions, timer: Timer) -> Result<CaseResult> {
    let c = MaterialParams::epoxy().c;
    let rhs: Vec<f64> = (0..cloud.len())
        .map(|i| cdp_source(&cloud.positions[i], &cloud.normals[i], cloud.hs_values[i], omega, c))
        .collect();
    solve_manufactured(cloud, m, omega, rhs, cdp_exact, options, timer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;

    /// `lap_S u = tr(Hess) - H n.grad - n^T Hess n`, plus `k^2 u`.
    fn generic_source(grad: Vec3, hess: Matrix3<f64>, u: f64, n: Vec3, hs: f64, k: f64) -> f64 {
        hess.trace() - hs * n.dot(&grad) - n.dot(&(hess * n)) + k * k * u
    }

    #[test]
    fn sphere_source_matches_extrinsic_identity() {
        let (omega, c) = (1000.0, 1161.0);
        let k = omega / c;
        for x in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.6, 0.0, 0.8), Vec3::new(-0.48, 0.6, 0.64)] {
            let s = x.sum();
            let grad = Vec3::repeat(-AMPLITUDE * k * (k * s).sin());
            let hess = Matrix3::repeat(-AMPLITUDE * k * k * (k * s).cos());
            let expected = generic_source(grad, hess, sphere_exact(&x, omega, c), x, 2.0, k);
            assert!((sphere_source(&x, omega, c) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn cdp_source_matches_extrinsic_identity() {
        let (omega, c) = (10000.0, 1161.0);
        let k = omega / c;
        let x = Vec3::new(0.3, -0.7, 1.1);
        let n = Vec3::new(0.2, -0.4, 0.9).normalize();
        let hs = 1.7;
        let grad = Vec3::new(-x[0].sin(), -x[1].sin(), -x[2].sin()) * AMPLITUDE;
        let hess = Matrix3::from_diagonal(&Vec3::new(-x[0].cos(), -x[1].cos(), -x[2].cos())) * AMPLITUDE;
        let expected = generic_source(grad, hess, cdp_exact(&x), n, hs, k);
        assert!((cdp_source(&x, &n, hs, omega, c) - expected).abs() < 1e-15);
    }

    #[test]
    fn cdp_exact_on_the_axis() {
        let z = 1.3;
        assert!((cdp_exact(&Vec3::new(0.0, 0.0, z)) - 1e-5 * (2.0 + z.cos())).abs() < 1e-20);
    }

    #[test]
    fn small_sphere_case_runs() {
        let r = case_sphere(600, 40, 1000.0).unwrap();
        assert_eq!(r.n, 600);
        assert!(r.global_error.unwrap() < 5e-2, "{:?}", r.global_error);
    }
}
