//! Benchmark cases, error metrics and parameter sweeps.

mod cylinder;
mod manufactured;
mod phononic;

use std::time::Instant;

use num_complex::Complex64;

use crate::assembly::{ComplexField, Discretization, SparseSystem};
use crate::geometry::SurfaceCloud;
use crate::sparse::SolveReport;
use crate::spatial::KdTree;
use crate::stencil::Derivative;
use crate::{GfdmError, Result, Vec3};

pub use cylinder::{arc_probe_points, case_cylinder, strip_1d_reference, CylinderCase};
pub use manufactured::{
    case_cdp, case_cdp_on, case_sphere, case_sphere_on, cdp_exact, cdp_source, sphere_exact,
    sphere_source,
};
pub use phononic::{
    bandgap_scan, case_periodic_inclusions, curvature_sweep, extract_bandgaps, frequency_sweep, linspace, omega_from_f_norm,
    transmission, transmission_with, BandgapSet, PhononicConfig, PhononicStrip, Spectrum,
    SpectrumPoint, TransmissionFormula, BANDGAP_THRESHOLD_DB,
};

/// Field values sampled along a curve on the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeCurve {
    pub label: String,
    pub points: Vec<Vec3>,
    pub values: Vec<Complex64>,
}

/// Outcome of one benchmark run.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub cloud: SurfaceCloud,
    pub field: ComplexField,
    pub global_error: Option<f64>,
    pub runtime_s: f64,
    pub n: usize,
    pub m: usize,
    pub omega: f64,
    pub report: SolveReport,
    pub probes: Vec<ProbeCurve>,
    /// Transmission in dB for strip cases with an outlet.
    pub transmission_db: Option<f64>,
    pub system: SparseSystem,
}

/// `||num - exact||_2 / ||exact||_2`.
pub fn global_relative_error(numerical: &[f64], exact: &[f64]) -> Result<f64> {
    if numerical.len() != exact.len() {
        return Err(GfdmError::DimensionMismatch(format!(
            "{} numerical values against {} exact values",
            numerical.len(),
            exact.len()
        )));
    }
    let den: f64 = exact.iter().map(|e| e * e).sum();
    if !(den > 0.0) {
        return Err(GfdmError::ZeroExactNorm);
    }
    let num: f64 = numerical.iter().zip(exact).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((num / den).sqrt())
}

/// Global error of the real part of a field against an exact solution on `test_nodes`.
pub fn field_error<F: Fn(&Vec3) -> f64>(
    field: &ComplexField,
    cloud: &SurfaceCloud,
    exact: F,
    test_nodes: &[usize],
) -> Result<f64> {
    let num: Vec<f64> = test_nodes.iter().map(|&i| field.values[i].re).collect();
    let ex: Vec<f64> = test_nodes.iter().map(|&i| exact(&cloud.positions[i])).collect();
    global_relative_error(&num, &ex)
}

/// Samples a field at arbitrary surface points by a second-order Taylor
/// expansion about the nearest node.
pub fn probe_field(
    field: &ComplexField,
    cloud: &SurfaceCloud,
    disc: &Discretization,
    points: &[Vec3],
) -> Vec<Complex64> {
    let tree = KdTree::new(&cloud.positions);
    let re = field.real();
    let im = field.imag();
    points
        .iter()
        .map(|p| {
            let j = tree.nearest(p, 1, |_| true)[0];
            let st = &disc.stencils[j];
            let d = p - cloud.positions[j];
            let taylor = |values: &[f64]| {
                let g = st.apply(|i| values[i]);
                let mut v = values[j];
                v += g[Derivative::X1.code()] * d[0]
                    + g[Derivative::X2.code()] * d[1]
                    + g[Derivative::X3.code()] * d[2];
                v += 0.5
                    * (g[Derivative::X1X1.code()] * d[0] * d[0]
                        + g[Derivative::X2X2.code()] * d[1] * d[1]
                        + g[Derivative::X3X3.code()] * d[2] * d[2]);
                v += g[Derivative::X1X2.code()] * d[0] * d[1]
                    + g[Derivative::X1X3.code()] * d[0] * d[2]
                    + g[Derivative::X2X3.code()] * d[1] * d[2];
                v
            };
            Complex64::new(taylor(&re), taylor(&im))
        })
        .collect()
}

/// Discrete L2 distance between two probe samplings, normalized by the second.
pub fn probe_gap(a: &[Complex64], reference: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(reference).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = reference.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub(crate) struct Timer(Instant);

impl Timer {
    pub(crate) fn start() -> Self {
        Self(Instant::now())
    }

    pub(crate) fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn error_of_exact_is_zero() {
        let e = [1.0, -2.0, 3.0];
        assert_eq!(global_relative_error(&e, &e).unwrap(), 0.0);
    }

    #[test]
    fn scaled_error_is_one_percent() {
        let e = [1.0, -2.0, 3.0, 0.5];
        let n: Vec<f64> = e.iter().map(|v| 1.01 * v).collect();
        assert!((global_relative_error(&n, &e).unwrap() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn zero_exact_norm_rejected() {
        assert!(matches!(
            global_relative_error(&[1.0], &[0.0]),
            Err(GfdmError::ZeroExactNorm)
        ));
    }

    #[test]
    fn five_node_direct_sum() {
        let num = [0.3, -1.2, 2.5, 0.0, 4.4];
        let ex = [0.25, -1.0, 2.0, 0.1, 4.0];
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 0..5 {
            a += (num[i] - ex[i]) * (num[i] - ex[i]);
            b += ex[i] * ex[i];
        }
        assert!((global_relative_error(&num, &ex).unwrap() - (a / b).sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn error_is_scale_invariant(
            pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40),
            scale in 0.01f64..100.0,
        ) {
            let num: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let ex: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            prop_assume!(ex.iter().map(|e| e * e).sum::<f64>() > 1e-6);
            let e1 = global_relative_error(&num, &ex).unwrap();
            let sn: Vec<f64> = num.iter().map(|v| v * scale).collect();
            let se: Vec<f64> = ex.iter().map(|v| v * scale).collect();
            let e2 = global_relative_error(&sn, &se).unwrap();
            prop_assert!((e1 - e2).abs() <= 1e-12 * e1.max(1.0));
            // Degree one in the error component.
            let doubled: Vec<f64> = num.iter().zip(&ex).map(|(n, e)| e + 2.0 * (n - e)).collect();
            let e3 = global_relative_error(&doubled, &ex).unwrap();
            prop_assert!((e3 - 2.0 * e1).abs() <= 1e-12 * e1.max(1.0));
        }
    }
}
