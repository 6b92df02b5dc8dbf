//! Half-cylinder patch driven from one arc edge, with and without holes.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{probe_field, CaseResult, ProbeCurve, Timer};
use crate::assembly::{assemble_with, solve, AssemblyOptions, Discretization, HelmholtzProblem, MaterialParams};
use crate::geometry::{
    carve_and_classify, hole_lattice_5x5, sample_strip, BoundaryTag, EdgeConditions, StripShape, StripSpec,
    SurfaceCloud,
};
use crate::{GfdmError, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderCase {
    pub dh: f64,
    pub with_holes: bool,
    pub omega: f64,
    pub m: usize,
    pub dirichlet_value: f64,
    pub radius: f64,
    pub theta: f64,
    pub half_width: f64,
    pub probe_count: usize,
    pub row_equilibration: bool,
}

impl CylinderCase {
    pub fn new(dh: f64, with_holes: bool) -> Self {
        Self {
            dh,
            with_holes,
            omega: 10000.0,
            m: 40,
            dirichlet_value: 1e-5,
            radius: 1.0,
            theta: PI,
            half_width: 1.5,
            probe_count: 51,
            row_equilibration: false,
        }
    }

    pub fn strip(&self) -> StripSpec {
        StripSpec {
            shape: StripShape::Cylinder { radius: self.radius },
            arc_length: self.radius * self.theta,
            half_width: self.half_width,
            spacing: self.dh,
        }
    }

    /// Excited on `Gamma1`; the other edges are zero-flux without holes and
    /// absorbing with holes.
    pub fn edge_conditions(&self) -> EdgeConditions {
        let far = if self.with_holes {
            BoundaryTag::GammaA
        } else {
            BoundaryTag::GammaN
        };
        EdgeConditions {
            gamma1: BoundaryTag::GammaI,
            gamma2: far,
            gamma3: far,
            gamma4: far,
        }
    }

    /// Heights `x2` of the probe curves.
    pub fn probe_heights(&self) -> Vec<f64> {
        if self.with_holes {
            vec![0.15, 0.75]
        } else {
            vec![0.0]
        }
    }

    pub fn build_cloud(&self) -> Result<SurfaceCloud> {
        let strip = self.strip();
        let mut cloud = sample_strip(&strip)?;
        cloud.apply_edge_conditions(&self.edge_conditions());
        if self.with_holes {
            cloud = carve_and_classify(&cloud, &strip, &hole_lattice_5x5(&strip), self.dh)?;
        }
        Ok(cloud)
    }
}

/// `count` points spaced uniformly in arc length along `x2 = y`.
pub fn arc_probe_points(strip: &StripSpec, y: f64, count: usize) -> Vec<Vec3> {
    let half = 0.5 * strip.arc_length;
    (0..count)
        .map(|k| {
            let s = if count > 1 {
                -half + strip.arc_length * k as f64 / (count - 1) as f64
            } else {
                0.0
            };
            strip.point(s, y)
        })
        .collect()
}

/// Exact field of the hole-free case, which does not depend on `x2`:
/// `u(s) = C cos(k (L/2 - s)) / cos(k L)`.
pub fn strip_1d_reference(s: f64, arc_length: f64, k: f64, c: f64) -> f64 {
    c * (k * (0.5 * arc_length - s)).cos() / (k * arc_length).cos()
}

pub fn case_cylinder(case: &CylinderCase) -> Result<CaseResult> {
    if !(case.omega > 0.0) {
        return Err(GfdmError::InvalidParameter(format!("omega must be positive, got {}", case.omega)));
    }
    let timer = Timer::start();
    let cloud = case.build_cloud()?;
    let disc = Discretization::new(&cloud, case.m)?;
    let mut problem = HelmholtzProblem::new(&cloud, MaterialParams::epoxy(), case.omega);
    problem.dirichlet_value = Complex64::new(case.dirichlet_value, 0.0);
    let options = AssemblyOptions {
        row_equilibration: case.row_equilibration,
        ..Default::default()
    };
    let system = assemble_with(&problem, &disc, options)?;
    let solution = solve(&system)?;
    let strip = case.strip();
    let probes = case
        .probe_heights()
        .into_iter()
        .map(|y| {
            let points = arc_probe_points(&strip, y, case.probe_count);
            let values = probe_field(&solution.field, &cloud, &disc, &points);
            ProbeCurve {
                label: format!("x2={y}"),
                points,
                values,
            }
        })
        .collect();
    Ok(CaseResult {
        n: cloud.len(),
        cloud,
        field: solution.field,
        global_error: None,
        runtime_s: timer.seconds(),
        m: case.m,
        omega: case.omega,
        report: solution.report,
        probes,
        transmission_db: None,
        system,
    })
}
