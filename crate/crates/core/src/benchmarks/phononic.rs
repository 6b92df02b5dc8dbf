//! Periodic strip with a row of gold inclusions in epoxy: transmission
//! spectra, bandgaps and curvature dependence.
//!
//! The strip has arc length 16 and width 1. Its arc start is excited, its
//! arc end is absorbing and its long edges are periodic images of each
//! other, so the strip models one period of an infinite array.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::assembly::{
    assemble_with, solve, AssemblyOptions, ComplexField, Discretization, HelmholtzProblem, MaterialParams,
    Solution,
};
use crate::geometry::{
    carve_and_classify, inclusion_radius, pair_periodic, sample_strip, BoundaryTag, Disc, DiscMode,
    EdgeConditions, StripSpec, SurfaceCloud,
};
use super::{CaseResult, Timer};
use crate::{par, GfdmError, Result, Vec3};

/// Transmission level below which a frequency lies in a bandgap.
pub const BANDGAP_THRESHOLD_DB: f64 = -10.0;

const LITERAL_REFERENCE: f64 = 2e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransmissionFormula {
    /// `20 log10(mean |u| on the outlet / mean |u| on the inlet)`.
    #[default]
    Ratio,
    /// `20 log10(mean |u| on the arc end / (2e-5 mean |u| on the arc start))`.
    Literal,
}

fn mean_amplitude(field: &ComplexField, nodes: &[usize]) -> f64 {
    nodes.iter().map(|&i| field.values[i].norm()).sum::<f64>() / nodes.len() as f64
}

/// Transmission in dB between the excited and the absorbing boundary.
pub fn transmission(field: &ComplexField, cloud: &SurfaceCloud) -> Result<f64> {
    transmission_with(field, cloud, TransmissionFormula::Ratio)
}

pub fn transmission_with(field: &ComplexField, cloud: &SurfaceCloud, formula: TransmissionFormula) -> Result<f64> {
    let inlet = cloud.indices_with(BoundaryTag::GammaI);
    let outlet = cloud.indices_with(BoundaryTag::GammaA);
    if inlet.is_empty() {
        return Err(GfdmError::EmptyBoundary("incident"));
    }
    if outlet.is_empty() {
        return Err(GfdmError::EmptyBoundary("absorbing"));
    }
    let ratio = mean_amplitude(field, &outlet) / mean_amplitude(field, &inlet);
    Ok(match formula {
        TransmissionFormula::Ratio => 20.0 * ratio.log10(),
        TransmissionFormula::Literal => 20.0 * (ratio / LITERAL_REFERENCE).log10(),
    })
}

/// `omega = 2 pi c0 f_norm` for unit lattice spacing.
pub fn omega_from_f_norm(f_norm: f64) -> f64 {
    2.0 * PI * MaterialParams::epoxy().c * f_norm
}

/// `n` equally spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhononicConfig {
    pub filling_fraction: f64,
    /// Curvature `1/R` of the strip; zero for a flat strip.
    pub curvature: f64,
    pub spacing: f64,
    pub m: usize,
    pub arc_length: f64,
    pub half_width: f64,
    pub inclusion_count: usize,
    pub dirichlet_value: f64,
    pub bloch_phase: Complex64,
    pub formula: TransmissionFormula,
    pub row_equilibration: bool,
}

impl Default for PhononicConfig {
    fn default() -> Self {
        Self {
            filling_fraction: 0.4,
            curvature: PI / 16.0,
            spacing: 0.05,
            m: 40,
            arc_length: 16.0,
            half_width: 0.5,
            inclusion_count: 9,
            dirichlet_value: 1e-5,
            bloch_phase: Complex64::new(1.0, 0.0),
            formula: TransmissionFormula::Ratio,
            row_equilibration: false,
        }
    }
}

impl PhononicConfig {
    pub fn strip(&self) -> StripSpec {
        StripSpec::with_curvature(self.curvature, self.arc_length, self.half_width, self.spacing)
    }

    /// Inclusions at unit arc spacing, centred on the strip.
    pub fn inclusions(&self) -> Vec<Disc> {
        if self.filling_fraction == 0.0 {
            return Vec::new();
        }
        let radius = inclusion_radius(self.filling_fraction);
        let mid = (self.inclusion_count as f64 + 1.0) / 2.0;
        (1..=self.inclusion_count)
            .map(|j| Disc {
                center_arc: j as f64 - mid,
                center_y: 0.0,
                radius,
                mode: DiscMode::Inclusion,
            })
            .collect()
    }

    pub fn edge_conditions() -> EdgeConditions {
        EdgeConditions {
            gamma1: BoundaryTag::GammaI,
            gamma2: BoundaryTag::GammaP1,
            gamma3: BoundaryTag::GammaA,
            gamma4: BoundaryTag::GammaP2,
        }
    }
}

/// Cloud and stencils of one strip geometry, reused across frequencies.
#[derive(Debug, Clone)]
pub struct PhononicStrip {
    pub config: PhononicConfig,
    pub cloud: SurfaceCloud,
    pub disc: Discretization,
}

impl PhononicStrip {
    pub fn build(config: PhononicConfig) -> Result<Self> {
        if !(config.filling_fraction >= 0.0) {
            return Err(GfdmError::InvalidParameter(format!(
                "filling fraction must be non-negative, got {}",
                config.filling_fraction
            )));
        }
        if !(config.curvature >= 0.0) {
            return Err(GfdmError::InvalidParameter(format!(
                "curvature must be non-negative, got {}",
                config.curvature
            )));
        }
        let strip = config.strip();
        let mut cloud = sample_strip(&strip)?;
        cloud.apply_edge_conditions(&PhononicConfig::edge_conditions());
        let inclusions = config.inclusions();
        if !inclusions.is_empty() {
            cloud = carve_and_classify(&cloud, &strip, &inclusions, config.spacing)?;
        }
        let lattice = Vec3::new(0.0, 2.0 * config.half_width, 0.0);
        let cloud = pair_periodic(&cloud, &lattice, 0.1 * config.spacing)?;
        let disc = Discretization::new(&cloud, config.m)?;
        Ok(Self { config, cloud, disc })
    }

    pub fn problem(&self, omega: f64) -> HelmholtzProblem<'_> {
        let mut problem = HelmholtzProblem::new(&self.cloud, MaterialParams::epoxy(), omega);
        problem.inclusion = Some(MaterialParams::gold());
        problem.dirichlet_value = Complex64::new(self.config.dirichlet_value, 0.0);
        problem.bloch_phase = self.config.bloch_phase;
        problem
    }

    pub fn options(&self) -> AssemblyOptions {
        AssemblyOptions {
            row_equilibration: self.config.row_equilibration,
            ..Default::default()
        }
    }

    pub fn solve(&self, f_norm: f64) -> Result<Solution> {
        let problem = self.problem(omega_from_f_norm(f_norm));
        let system = assemble_with(&problem, &self.disc, self.options())?;
        solve(&system)
    }

    /// Transmission at one normalized frequency.
    pub fn transmission_at(&self, f_norm: f64) -> Result<f64> {
        let solution = self.solve(f_norm)?;
        transmission_with(&solution.field, &self.cloud, self.config.formula)
    }

    pub fn sweep(&self, frequencies: &[f64]) -> Result<Spectrum> {
        let mut sorted = frequencies.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let t: Vec<Result<f64>> = par::map_indices(sorted.len(), |i| self.transmission_at(sorted[i]));
        let points = sorted
            .iter()
            .zip(t)
            .map(|(&f_norm, t)| t.map(|t_db| SpectrumPoint { f_norm, t_db }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Spectrum {
            points,
            filling_fraction: self.config.filling_fraction,
            curvature: self.config.curvature,
        })
    }
}

/// One solve of the strip at `f_norm`, with its transmission.
pub fn case_periodic_inclusions(config: PhononicConfig, f_norm: f64) -> Result<CaseResult> {
    if !(f_norm > 0.0) {
        return Err(GfdmError::InvalidParameter(format!("f_norm must be positive, got {f_norm}")));
    }
    let timer = Timer::start();
    let strip = PhononicStrip::build(config)?;
    let omega = omega_from_f_norm(f_norm);
    let system = assemble_with(&strip.problem(omega), &strip.disc, strip.options())?;
    let solution = solve(&system)?;
    let t_db = transmission_with(&solution.field, &strip.cloud, config.formula)?;
    Ok(CaseResult {
        n: strip.cloud.len(),
        cloud: strip.cloud,
        field: solution.field,
        global_error: None,
        runtime_s: timer.seconds(),
        m: config.m,
        omega,
        report: solution.report,
        probes: Vec::new(),
        transmission_db: Some(t_db),
        system,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub f_norm: f64,
    pub t_db: f64,
}

/// Transmission spectrum on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub points: Vec<SpectrumPoint>,
    pub filling_fraction: f64,
    pub curvature: f64,
}

impl Spectrum {
    pub fn t_at(&self, f_norm: f64) -> Option<f64> {
        self.points.iter().find(|p| p.f_norm == f_norm).map(|p| p.t_db)
    }
}

/// Stop bands `(f_lo, f_hi)` of a spectrum.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BandgapSet {
    pub filling_fraction: f64,
    pub intervals: Vec<(f64, f64)>,
}

impl BandgapSet {
    pub fn first(&self) -> Option<(f64, f64)> {
        self.intervals.first().copied()
    }
}

/// Maximal runs of grid points with `T < threshold`, as `(first, last)` frequency.
pub fn extract_bandgaps(spectrum: &Spectrum, threshold_db: f64) -> BandgapSet {
    let mut intervals = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for p in &spectrum.points {
        if p.t_db < threshold_db {
            open = Some(match open {
                Some((lo, _)) => (lo, p.f_norm),
                None => (p.f_norm, p.f_norm),
            });
        } else if let Some(iv) = open.take() {
            intervals.push(iv);
        }
    }
    intervals.extend(open);
    BandgapSet {
        filling_fraction: spectrum.filling_fraction,
        intervals,
    }
}

/// Spectrum over `steps` frequencies in `[f_lo, f_hi]`.
pub fn frequency_sweep(config: PhononicConfig, f_range: (f64, f64), steps: usize) -> Result<Spectrum> {
    check_range("frequency", f_range, steps)?;
    PhononicStrip::build(config)?.sweep(&linspace(f_range.0, f_range.1, steps))
}

/// Bandgaps for `ff_steps` filling fractions in `ff_range`.
pub fn bandgap_scan(
    base: PhononicConfig,
    ff_range: (f64, f64),
    ff_steps: usize,
    f_range: (f64, f64),
    f_steps: usize,
) -> Result<Vec<BandgapSet>> {
    check_range("filling fraction", ff_range, ff_steps)?;
    linspace(ff_range.0, ff_range.1, ff_steps)
        .into_iter()
        .map(|ff| {
            let config = PhononicConfig {
                filling_fraction: ff,
                ..base
            };
            frequency_sweep(config, f_range, f_steps).map(|s| extract_bandgaps(&s, BANDGAP_THRESHOLD_DB))
        })
        .collect()
}

/// Spectra for each curvature at fixed arc length.
pub fn curvature_sweep(
    base: PhononicConfig,
    curvatures: &[f64],
    f_range: (f64, f64),
    f_steps: usize,
) -> Result<Vec<Spectrum>> {
    curvatures
        .iter()
        .map(|&ka| {
            frequency_sweep(
                PhononicConfig {
                    curvature: ka,
                    ..base
                },
                f_range,
                f_steps,
            )
        })
        .collect()
}

fn check_range(what: &str, range: (f64, f64), steps: usize) -> Result<()> {
    if steps == 0 || !(range.0 <= range.1) || (steps > 1 && range.0 == range.1) {
        return Err(GfdmError::InvalidParameter(format!(
            "{what} range [{}, {}] with {steps} steps is empty",
            range.0, range.1
        )));
    }
    Ok(())
}
