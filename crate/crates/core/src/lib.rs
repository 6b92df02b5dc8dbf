//! Meshless solver for time-harmonic acoustic waves on curved surfaces.
//!
//! The surface Helmholtz equation `mu * lap_S u + rho * omega^2 u = g` is
//! written in extrinsic form (Euclidean derivatives, the unit normal and the
//! mean-curvature term `H_S`) and discretized with generalized finite
//! difference stencils built over the `m` nearest nodes of each point.
//!
//! Pipeline:
//! - [`geometry`]: implicit surfaces, tagged node clouds, holes/inclusions, periodic pairing
//! - [`stencil`]: weighted least-squares derivative weights
//! - [`operators`]: Laplace-Beltrami, surface gradient and conormal rows
//! - [`assembly`]: complex block system and sparse direct solve
//! - [`benchmarks`]: manufactured cases, transmission spectra, bandgap scans
//! - [`io`]: CSV, legacy VTK and Matrix Market writers

pub mod assembly;
pub mod benchmarks;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod operators;
pub mod spatial;
pub mod sparse;
pub mod stencil;

mod par;

pub use error::{GfdmError, Result};

/// Three-vector used for positions, normals and conormals.
pub type Vec3 = nalgebra::Vector3<f64>;

pub use num_complex::Complex64;
