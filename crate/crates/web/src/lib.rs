//! Browser bindings for three small solver demos.
//!
//! Each export has a plain Rust counterpart returning `Result<_, String>` so
//! the numerics can be tested natively; the `#[wasm_bindgen]` wrappers only
//! translate errors.

use manifold_gfdm::benchmarks::{case_periodic_inclusions, case_sphere, frequency_sweep, PhononicConfig};
use manifold_gfdm::geometry::StripSpec;
use wasm_bindgen::prelude::*;

const MAX_SPHERE_NODES: usize = 6000;
const MAX_SWEEP_STEPS: usize = 60;
const MIN_STRIP_SPACING: f64 = 0.04;

/// Nodes and solution of the manufactured sphere problem.
#[wasm_bindgen]
pub struct SphereDemo {
    positions: Vec<f64>,
    values: Vec<f64>,
    global_error: f64,
}

#[wasm_bindgen]
impl SphereDemo {
    /// Interleaved `x1, x2, x3` per node.
    #[wasm_bindgen(getter)]
    pub fn positions(&self) -> Vec<f64> {
        self.positions.clone()
    }

    /// Real part of the field per node.
    #[wasm_bindgen(getter)]
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn global_error(&self) -> f64 {
        self.global_error
    }
}

/// Field amplitude on the unrolled strip, with its transmission.
#[wasm_bindgen]
pub struct StripDemo {
    coords: Vec<f64>,
    amplitude: Vec<f64>,
    inclusion: Vec<u8>,
    transmission_db: f64,
}

#[wasm_bindgen]
impl StripDemo {
    /// Interleaved arc coordinate `s` and height `x2` per node.
    #[wasm_bindgen(getter)]
    pub fn coords(&self) -> Vec<f64> {
        self.coords.clone()
    }

    /// `|u|` per node.
    #[wasm_bindgen(getter)]
    pub fn amplitude(&self) -> Vec<f64> {
        self.amplitude.clone()
    }

    /// 1 for inclusion nodes, 0 for matrix nodes.
    #[wasm_bindgen(getter)]
    pub fn inclusion(&self) -> Vec<u8> {
        self.inclusion.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn transmission_db(&self) -> f64 {
        self.transmission_db
    }
}

pub fn sphere(n: usize, omega: f64) -> Result<SphereDemo, String> {
    if !(100..=MAX_SPHERE_NODES).contains(&n) {
        return Err(format!("node count must lie in [100, {MAX_SPHERE_NODES}], got {n}"));
    }
    let r = case_sphere(n, 40, omega).map_err(|e| e.to_string())?;
    Ok(SphereDemo {
        positions: r.cloud.positions.iter().flat_map(|x| [x[0], x[1], x[2]]).collect(),
        values: r.field.real(),
        global_error: r.global_error.unwrap_or(f64::NAN),
    })
}

fn strip_config(filling_fraction: f64, curvature: f64, spacing: f64) -> Result<PhononicConfig, String> {
    if !(spacing >= MIN_STRIP_SPACING) {
        return Err(format!("spacing must be at least {MIN_STRIP_SPACING}, got {spacing}"));
    }
    if !(0.0..=0.7).contains(&filling_fraction) {
        return Err(format!("filling fraction must lie in [0, 0.7], got {filling_fraction}"));
    }
    if !(0.0..=0.39).contains(&curvature) {
        return Err(format!("curvature must lie in [0, 0.39], got {curvature}"));
    }
    Ok(PhononicConfig {
        filling_fraction,
        curvature,
        spacing,
        ..Default::default()
    })
}

pub fn strip(filling_fraction: f64, curvature: f64, f_norm: f64, spacing: f64) -> Result<StripDemo, String> {
    let config = strip_config(filling_fraction, curvature, spacing)?;
    let spec: StripSpec = config.strip();
    let r = case_periodic_inclusions(config, f_norm).map_err(|e| e.to_string())?;
    Ok(StripDemo {
        coords: r.cloud.positions.iter().flat_map(|x| [spec.arc_of(x), x[1]]).collect(),
        amplitude: r.field.amplitude(),
        inclusion: r.cloud.region.iter().map(|g| u8::from(g.code() == 2)).collect(),
        transmission_db: r.transmission_db.unwrap_or(f64::NAN),
    })
}

/// Interleaved `f_norm, T_db` pairs.
pub fn spectrum(
    filling_fraction: f64,
    curvature: f64,
    f_min: f64,
    f_max: f64,
    steps: usize,
    spacing: f64,
) -> Result<Vec<f64>, String> {
    if !(1..=MAX_SWEEP_STEPS).contains(&steps) {
        return Err(format!("steps must lie in [1, {MAX_SWEEP_STEPS}], got {steps}"));
    }
    let config = strip_config(filling_fraction, curvature, spacing)?;
    let s = frequency_sweep(config, (f_min, f_max), steps).map_err(|e| e.to_string())?;
    Ok(s.points.iter().flat_map(|p| [p.f_norm, p.t_db]).collect())
}

#[wasm_bindgen(js_name = sphereDemo)]
pub fn sphere_js(n: usize, omega: f64) -> Result<SphereDemo, JsError> {
    sphere(n, omega).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = stripDemo)]
pub fn strip_js(filling_fraction: f64, curvature: f64, f_norm: f64, spacing: f64) -> Result<StripDemo, JsError> {
    strip(filling_fraction, curvature, f_norm, spacing).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = spectrumSweep)]
pub fn spectrum_js(
    filling_fraction: f64,
    curvature: f64,
    f_min: f64,
    f_max: f64,
    steps: usize,
    spacing: f64,
) -> Result<Vec<f64>, JsError> {
    spectrum(filling_fraction, curvature, f_min, f_max, steps, spacing).map_err(|e| JsError::new(&e))
}
