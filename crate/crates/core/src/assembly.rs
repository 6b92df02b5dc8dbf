//! Assembly and solution of the complex surface Helmholtz system.
//!
//! Every node owns exactly one row, chosen by its boundary tag:
//!
//! | tag | row |
//! |-----|-----|
//! | interior | `mu_j lap_S u + rho_j omega^2 u = g` |
//! | incident | `u = C` |
//! | absorbing | `du/dnu - i (omega / c_1) u = 0` |
//! | zero flux | `du/dnu = 0` |
//! | periodic image | `u(p2) - e u(p1) = 0` |
//! | periodic source | `mu_1 du/da (p2) - e mu_1 du/da (p1) = 0` |
//! | interface, inclusion side | `u(D2) - u(D1) = 0` |
//! | interface, matrix side | `mu_1 du1/dnu1 + mu_2 du2/dnu2 = 0` |
//! | hole rim | `mu_1 du/dnu = 0` |
//!
//! Here `e` is the Bloch phase, `a` the lattice direction (the outward
//! conormal of the periodic image edge) and `nu1 = -nu2` the outward
//! conormals of the two material sides of an interface.

use num_complex::Complex64;

use crate::geometry::{BoundaryTag, Region, SurfaceCloud};
use crate::operators::{conormal_derivative_row, laplace_beltrami_at, OperatorRow};
use crate::sparse::{CscMatrix, SolveReport, SparseLu};
use crate::stencil::{build_all_stencils, StencilWeights};
use crate::{GfdmError, Result, Vec3};

/// Linear elastic (antiplane shear) material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Wave speed, m/s.
    pub c: f64,
    /// Density, kg/m^3.
    pub rho: f64,
    /// Shear modulus `rho c^2`, Pa.
    pub mu: f64,
}

impl MaterialParams {
    pub fn new(c: f64, rho: f64) -> Result<Self> {
        if !(c > 0.0 && rho > 0.0) || !c.is_finite() || !rho.is_finite() {
            return Err(GfdmError::InvalidParameter(format!(
                "material needs c > 0 and rho > 0, got c = {c}, rho = {rho}"
            )));
        }
        Ok(Self { c, rho, mu: rho * c * c })
    }

    pub fn epoxy() -> Self {
        Self::new(1161.0, 1180.0).expect("valid material")
    }

    pub fn gold() -> Self {
        Self::new(1239.0, 19500.0).expect("valid material")
    }

    /// Wavenumber `omega / c`.
    pub fn wavenumber(&self, omega: f64) -> f64 {
        omega / self.c
    }
}

/// Right-hand side of the interior rows.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Zero,
    /// One value per node; only interior entries are used.
    Nodal(Vec<Complex64>),
}

impl Source {
    pub fn from_fn<F: Fn(usize) -> Complex64>(n: usize, f: F) -> Self {
        Source::Nodal((0..n).map(f).collect())
    }

    fn at(&self, i: usize) -> Complex64 {
        match self {
            Source::Zero => Complex64::default(),
            Source::Nodal(v) => v[i],
        }
    }
}

/// Everything that defines one frequency-domain problem on a cloud.
#[derive(Debug, Clone)]
pub struct HelmholtzProblem<'a> {
    pub cloud: &'a SurfaceCloud,
    pub matrix: MaterialParams,
    pub inclusion: Option<MaterialParams>,
    pub omega: f64,
    pub source: Source,
    pub dirichlet_value: Complex64,
    pub bloch_phase: Complex64,
}

impl<'a> HelmholtzProblem<'a> {
    /// Single-material problem with zero source, `C = 1e-5` and unit Bloch phase.
    pub fn new(cloud: &'a SurfaceCloud, matrix: MaterialParams, omega: f64) -> Self {
        Self {
            cloud,
            matrix,
            inclusion: None,
            omega,
            source: Source::Zero,
            dirichlet_value: Complex64::new(1e-5, 0.0),
            bloch_phase: Complex64::new(1.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(GfdmError::InvalidParameter(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if (self.bloch_phase.norm() - 1.0).abs() > 1e-12 {
            return Err(GfdmError::InvalidParameter(format!(
                "Bloch phase must have unit modulus, got {}",
                self.bloch_phase.norm()
            )));
        }
        if let Source::Nodal(v) = &self.source {
            if v.len() != self.cloud.len() {
                return Err(GfdmError::DimensionMismatch(format!(
                    "source has {} values for {} nodes",
                    v.len(),
                    self.cloud.len()
                )));
            }
        }
        if self.inclusion.is_none() && self.cloud.region.contains(&Region::Inclusion) {
            return Err(GfdmError::InvalidParameter(
                "cloud has inclusion nodes but no inclusion material".into(),
            ));
        }
        Ok(())
    }

    fn material(&self, region: Region) -> MaterialParams {
        match region {
            Region::Matrix => self.matrix,
            Region::Inclusion => self.inclusion.unwrap_or(self.matrix),
        }
    }
}

/// Stencils for a cloud, reusable across frequencies and excitations.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub stencils: Vec<StencilWeights>,
    pub stencil_size: usize,
}

impl Discretization {
    pub fn new(cloud: &SurfaceCloud, m: usize) -> Result<Self> {
        Ok(Self {
            stencils: build_all_stencils(cloud, m)?,
            stencil_size: m,
        })
    }

    fn stencil(&self, i: usize) -> Result<&StencilWeights> {
        self.stencils
            .get(i)
            .filter(|s| s.center == i)
            .ok_or(GfdmError::MissingStencil(i))
    }
}

/// Equation carried by a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    Governing(Region),
    Dirichlet,
    Absorbing,
    ZeroFlux,
    PeriodicValue,
    PeriodicFlux,
    InterfaceValue,
    InterfaceFlux,
    FreeRim,
}

/// How periodic rows are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeriodicMode {
    /// Rows carry the problem's Bloch phase.
    #[default]
    Bloch,
    /// Plain periodicity, ignoring the Bloch phase.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AssemblyOptions {
    /// Divide each row and its right-hand side by the row's largest magnitude.
    pub row_equilibration: bool,
    pub periodic_mode: PeriodicMode,
}

/// Square complex system in triplet form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub n: usize,
    pub triplets: Vec<(usize, usize, Complex64)>,
    pub rhs: Vec<Complex64>,
    pub row_kinds: Vec<RowKind>,
}

impl SparseSystem {
    pub fn to_csc(&self) -> Result<CscMatrix> {
        CscMatrix::from_triplets(self.n, self.n, &self.triplets)
    }

    /// Triplets of one row, in emission order.
    pub fn row(&self, r: usize) -> Vec<(usize, Complex64)> {
        self.triplets
            .iter()
            .filter(|t| t.0 == r)
            .map(|&(_, c, v)| (c, v))
            .collect()
    }

    /// `A u - b` evaluated row by row.
    pub fn residual(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut r: Vec<Complex64> = self.rhs.iter().map(|b| -b).collect();
        for &(i, j, v) in &self.triplets {
            r[i] += v * u[j];
        }
        r
    }

    pub fn count(&self, kind: RowKind) -> usize {
        self.row_kinds.iter().filter(|&&k| k == kind).count()
    }
}

/// Complex nodal solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn imag(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }

    pub fn amplitude(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn phase(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.arg()).collect()
    }
}

/// A solved field with residual diagnostics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: ComplexField,
    pub report: SolveReport,
}

struct RowBuilder<'s> {
    row: usize,
    triplets: &'s mut Vec<(usize, usize, Complex64)>,
}

impl RowBuilder<'_> {
    fn add(&mut self, col: usize, v: Complex64) {
        self.triplets.push((self.row, col, v));
    }

    fn add_real(&mut self, op: &OperatorRow, factor: Complex64) {
        for (&j, &c) in op.indices.iter().zip(&op.coeffs) {
            self.triplets.push((self.row, j, factor * c));
        }
    }
}

fn conormal_of(cloud: &SurfaceCloud, i: usize) -> Result<Vec3> {
    cloud.conormals[i].ok_or(GfdmError::MissingConormal(i))
}

/// Partner lookup tables for periodic and interface pairs.
struct Partners {
    periodic: Vec<Option<usize>>,
    interface: Vec<Option<usize>>,
}

impl Partners {
    fn new(cloud: &SurfaceCloud) -> Self {
        let mut periodic = vec![None; cloud.len()];
        for &(p1, p2) in &cloud.periodic_pairs {
            periodic[p1] = Some(p2);
            periodic[p2] = Some(p1);
        }
        let mut interface = vec![None; cloud.len()];
        for &(a, b) in &cloud.interface_pairs {
            interface[a] = Some(b);
            interface[b] = Some(a);
        }
        Self { periodic, interface }
    }
}

/// Assembles with default options.
pub fn assemble(problem: &HelmholtzProblem, disc: &Discretization) -> Result<SparseSystem> {
    assemble_with(problem, disc, AssemblyOptions::default())
}

pub fn assemble_with(
    problem: &HelmholtzProblem,
    disc: &Discretization,
    options: AssemblyOptions,
) -> Result<SparseSystem> {
    problem.validate()?;
    let cloud = problem.cloud;
    let n = cloud.len();
    if disc.stencils.len() != n {
        return Err(GfdmError::MissingStencil(disc.stencils.len().min(n)));
    }
    let partners = Partners::new(cloud);
    let one = Complex64::new(1.0, 0.0);
    let mu1 = Complex64::new(problem.matrix.mu, 0.0);
    let phase = match options.periodic_mode {
        PeriodicMode::Bloch => Some(problem.bloch_phase),
        PeriodicMode::Plain => None,
    };
    let mut triplets = Vec::with_capacity(n * (disc.stencil_size + 2));
    let mut rhs = vec![Complex64::default(); n];
    let mut row_kinds = Vec::with_capacity(n);

    for i in 0..n {
        let mut row = RowBuilder {
            row: i,
            triplets: &mut triplets,
        };
        let kind = match cloud.boundary[i] {
            BoundaryTag::Interior => {
                let region = cloud.region[i];
                let mat = problem.material(region);
                let lb = laplace_beltrami_at(cloud, disc.stencil(i)?);
                row.add_real(&lb, Complex64::new(mat.mu, 0.0));
                row.add(i, Complex64::new(mat.rho * problem.omega * problem.omega, 0.0));
                rhs[i] = problem.source.at(i);
                RowKind::Governing(region)
            }
            BoundaryTag::GammaI => {
                row.add(i, one);
                rhs[i] = problem.dirichlet_value;
                RowKind::Dirichlet
            }
            BoundaryTag::GammaA => {
                let nu = conormal_of(cloud, i)?;
                row.add_real(&conormal_derivative_row(disc.stencil(i)?, &nu), one);
                let k = problem.matrix.wavenumber(problem.omega);
                row.add(i, Complex64::new(0.0, -k));
                RowKind::Absorbing
            }
            BoundaryTag::GammaN => {
                let nu = conormal_of(cloud, i)?;
                row.add_real(&conormal_derivative_row(disc.stencil(i)?, &nu), one);
                RowKind::ZeroFlux
            }
            BoundaryTag::GammaP2 => {
                let p1 = partners.periodic[i].ok_or(GfdmError::UnmatchedPeriodicNode { node: i, tol: 0.0 })?;
                row.add(i, one);
                match phase {
                    Some(e) => row.add(p1, -(e * one)),
                    None => row.add(p1, -one),
                }
                RowKind::PeriodicValue
            }
            BoundaryTag::GammaP1 => {
                let p2 = partners.periodic[i].ok_or(GfdmError::UnmatchedPeriodicNode { node: i, tol: 0.0 })?;
                let lattice_dir = conormal_of(cloud, p2)?;
                let at_p2 = conormal_derivative_row(disc.stencil(p2)?, &lattice_dir);
                let at_p1 = conormal_derivative_row(disc.stencil(i)?, &lattice_dir);
                row.add_real(&at_p2, mu1);
                match phase {
                    Some(e) => row.add_real(&at_p1, -(e * mu1)),
                    None => row.add_real(&at_p1, -mu1),
                }
                RowKind::PeriodicFlux
            }
            BoundaryTag::Gamma0Inclusion => {
                let j = partners.interface[i].ok_or_else(|| {
                    GfdmError::InvalidParameter(format!("interface node {i} has no matrix-side partner"))
                })?;
                row.add(i, one);
                row.add(j, -one);
                RowKind::InterfaceValue
            }
            BoundaryTag::Gamma0Matrix => {
                let nu = conormal_of(cloud, i)?;
                let own = conormal_derivative_row(disc.stencil(i)?, &nu);
                row.add_real(&own, mu1);
                match partners.interface[i] {
                    Some(j) => {
                        let mu2 = problem.material(cloud.region[j]).mu;
                        let nu2 = conormal_of(cloud, j)?;
                        let other = conormal_derivative_row(disc.stencil(j)?, &nu2);
                        row.add_real(&other, Complex64::new(mu2, 0.0));
                        RowKind::InterfaceFlux
                    }
                    None => RowKind::FreeRim,
                }
            }
        };
        row_kinds.push(kind);
    }

    let mut system = SparseSystem {
        n,
        triplets,
        rhs,
        row_kinds,
    };
    if options.row_equilibration {
        equilibrate_rows(&mut system);
    }
    Ok(system)
}

/// Scales every row and its right-hand side by `1 / max_j |a_ij|`.
pub fn equilibrate_rows(system: &mut SparseSystem) {
    let mut row_max = vec![0.0f64; system.n];
    for &(r, _, v) in &system.triplets {
        row_max[r] = row_max[r].max(v.norm());
    }
    for (r, _, v) in &mut system.triplets {
        if row_max[*r] > 0.0 {
            *v /= row_max[*r];
        }
    }
    for (r, b) in system.rhs.iter_mut().enumerate() {
        if row_max[r] > 0.0 {
            *b /= row_max[r];
        }
    }
}

/// Factors and solves an assembled system.
pub fn solve(system: &SparseSystem) -> Result<Solution> {
    let a = system.to_csc()?;
    let lu = SparseLu::factor(&a)?;
    let (values, report) = lu.solve_refined(&a, &system.rhs)?;
    Ok(Solution {
        field: ComplexField::new(values),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_cylinder_patch, sample_sphere, EdgeConditions};

    #[test]
    fn material_moduli() {
        let e = MaterialParams::epoxy();
        assert!((e.mu - 1180.0 * 1161.0 * 1161.0).abs() <= 1e-12 * e.mu);
        assert!((e.mu - 1.5905e9).abs() / e.mu < 1e-4);
        let g = MaterialParams::gold();
        assert!((g.mu - 2.9935e10).abs() / g.mu < 1e-4);
        assert!(MaterialParams::new(-1.0, 1.0).is_err());
    }

    #[test]
    fn closed_sphere_has_only_governing_rows() {
        let cloud = sample_sphere(300).unwrap();
        let disc = Discretization::new(&cloud, 40).unwrap();
        let problem = HelmholtzProblem::new(&cloud, MaterialParams::epoxy(), 1000.0);
        let sys = assemble(&problem, &disc).unwrap();
        assert_eq!(sys.n, 300);
        assert_eq!(sys.count(RowKind::Governing(Region::Matrix)), 300);
        for r in 0..sys.n {
            assert!(sys.row(r).len() <= 42);
        }
    }

    #[test]
    fn patch_row_partition_matches_tags() {
        let mut cloud = sample_cylinder_patch(1.0, std::f64::consts::PI, 1.5, 0.1).unwrap();
        cloud.apply_edge_conditions(&EdgeConditions {
            gamma1: BoundaryTag::GammaI,
            gamma2: BoundaryTag::GammaN,
            gamma3: BoundaryTag::GammaN,
            gamma4: BoundaryTag::GammaN,
        });
        let disc = Discretization::new(&cloud, 40).unwrap();
        let problem = HelmholtzProblem::new(&cloud, MaterialParams::epoxy(), 10000.0);
        let sys = assemble(&problem, &disc).unwrap();
        assert_eq!(sys.count(RowKind::Dirichlet), cloud.count(BoundaryTag::GammaI));
        assert_eq!(sys.count(RowKind::ZeroFlux), cloud.count(BoundaryTag::GammaN));
        assert_eq!(
            sys.count(RowKind::Governing(Region::Matrix)),
            cloud.count(BoundaryTag::Interior)
        );
        let sol = solve(&sys).unwrap();
        for i in cloud.indices_with(BoundaryTag::GammaI) {
            assert_eq!(sol.field.values[i], Complex64::new(1e-5, 0.0));
        }
    }

    #[test]
    fn row_equilibration_normalizes_rows() {
        let cloud = sample_sphere(200).unwrap();
        let disc = Discretization::new(&cloud, 30).unwrap();
        let problem = HelmholtzProblem::new(&cloud, MaterialParams::epoxy(), 500.0);
        let sys = assemble_with(
            &problem,
            &disc,
            AssemblyOptions {
                row_equilibration: true,
                ..Default::default()
            },
        )
        .unwrap();
        for r in 0..sys.n {
            let m = sys.row(r).iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
            assert!((m - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_problem_rejected() {
        let cloud = sample_sphere(50).unwrap();
        let disc = Discretization::new(&cloud, 20).unwrap();
        let mut problem = HelmholtzProblem::new(&cloud, MaterialParams::epoxy(), 100.0);
        problem.bloch_phase = Complex64::new(2.0, 0.0);
        assert!(assemble(&problem, &disc).is_err());
        problem.bloch_phase = Complex64::new(1.0, 0.0);
        problem.omega = 0.0;
        assert!(assemble(&problem, &disc).is_err());
    }
}
