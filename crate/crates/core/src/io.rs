//! CSV, legacy VTK and Matrix Market readers and writers.
//!
//! Floats are written with 17 significant digits so that every value
//! round-trips exactly. Files are written to a temporary name in the target
//! directory and renamed into place once complete.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::assembly::{ComplexField, SparseSystem};
use crate::benchmarks::{BandgapSet, ProbeCurve, Spectrum};
use crate::geometry::{BoundaryTag, Region, SurfaceCloud};
use crate::stencil::{Derivative, StencilWeights};
use crate::{GfdmError, Result, Vec3};

pub const CLOUD_HEADER: &str = "x1,x2,x3,n1,n2,n3,hs,region,boundary";
pub const FIELD_HEADER: &str = "node,x1,x2,x3,re_u,im_u,abs_u";
pub const SPECTRUM_HEADER: &str = "f_norm,T_db";
pub const BANDGAP_HEADER: &str = "Ff,f_lo,f_hi";
pub const STENCIL_HEADER: &str = "center,neighbor,deriv_code,weight";
pub const PROBE_HEADER: &str = "curve,point,x1,x2,x3,re_u,im_u,abs_u";

/// A float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| GfdmError::InvalidParameter(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = dir.join(tmp_name);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| GfdmError::Parse(format!("line {line}: cannot parse `{field}` as a number")))
}

pub fn cloud_to_csv(cloud: &SurfaceCloud) -> String {
    let mut out = String::with_capacity(cloud.len() * 200);
    out.push_str(CLOUD_HEADER);
    out.push('\n');
    for i in 0..cloud.len() {
        let x = cloud.positions[i];
        let n = cloud.normals[i];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(x[0]),
            fmt_f64(x[1]),
            fmt_f64(x[2]),
            fmt_f64(n[0]),
            fmt_f64(n[1]),
            fmt_f64(n[2]),
            fmt_f64(cloud.hs_values[i]),
            cloud.region[i].code(),
            cloud.boundary[i].code()
        );
    }
    out
}

/// Parses a cloud CSV. Conormals, edges and pairings are not part of the format.
pub fn cloud_from_csv(text: &str) -> Result<SurfaceCloud> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CLOUD_HEADER => {}
        _ => return Err(GfdmError::Parse(format!("expected header `{CLOUD_HEADER}`"))),
    }
    let mut cloud = SurfaceCloud::default();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(GfdmError::Parse(format!("line {}: expected 9 fields, found {}", ln + 1, f.len())));
        }
        let v: Vec<f64> = f[..7].iter().map(|s| parse_f64(s, ln + 1)).collect::<Result<_>>()?;
        let region = f[7]
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(Region::from_code)
            .ok_or_else(|| GfdmError::Parse(format!("line {}: unknown region `{}`", ln + 1, f[7])))?;
        let boundary = f[8]
            .trim()
            .parse::<u8>()
            .ok()
            .and_then(BoundaryTag::from_code)
            .ok_or_else(|| GfdmError::Parse(format!("line {}: unknown boundary `{}`", ln + 1, f[8])))?;
        cloud.push(
            Vec3::new(v[0], v[1], v[2]),
            Vec3::new(v[3], v[4], v[5]),
            v[6],
            region,
            boundary,
            None,
            None,
        );
    }
    Ok(cloud)
}

pub fn write_cloud_csv(path: &Path, cloud: &SurfaceCloud) -> Result<()> {
    atomic_write(path, cloud_to_csv(cloud).as_bytes())
}

pub fn read_cloud_csv(path: &Path) -> Result<SurfaceCloud> {
    cloud_from_csv(&fs::read_to_string(path)?)
}

pub fn field_to_csv(cloud: &SurfaceCloud, field: &ComplexField) -> String {
    let mut out = String::with_capacity(cloud.len() * 140);
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for (i, (x, u)) in cloud.positions.iter().zip(&field.values).enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{}",
            fmt_f64(x[0]),
            fmt_f64(x[1]),
            fmt_f64(x[2]),
            fmt_f64(u.re),
            fmt_f64(u.im),
            fmt_f64(u.norm())
        );
    }
    out
}

pub fn write_field_csv(path: &Path, cloud: &SurfaceCloud, field: &ComplexField) -> Result<()> {
    atomic_write(path, field_to_csv(cloud, field).as_bytes())
}

pub fn probes_to_csv(probes: &[ProbeCurve]) -> String {
    let mut out = String::from(PROBE_HEADER);
    out.push('\n');
    for p in probes {
        for (k, (x, u)) in p.points.iter().zip(&p.values).enumerate() {
            let _ = writeln!(
                out,
                "{},{k},{},{},{},{},{},{}",
                p.label,
                fmt_f64(x[0]),
                fmt_f64(x[1]),
                fmt_f64(x[2]),
                fmt_f64(u.re),
                fmt_f64(u.im),
                fmt_f64(u.norm())
            );
        }
    }
    out
}

pub fn spectrum_to_csv(spectrum: &Spectrum) -> String {
    let mut out = String::from(SPECTRUM_HEADER);
    out.push('\n');
    for p in &spectrum.points {
        let _ = writeln!(out, "{},{}", fmt_f64(p.f_norm), fmt_f64(p.t_db));
    }
    out
}

/// Parses `f_norm,T_db` rows.
pub fn spectrum_from_csv(text: &str, filling_fraction: f64, curvature: f64) -> Result<Spectrum> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SPECTRUM_HEADER => {}
        _ => return Err(GfdmError::Parse(format!("expected header `{SPECTRUM_HEADER}`"))),
    }
    let mut points = Vec::new();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| GfdmError::Parse(format!("line {}: expected 2 fields", ln + 1)))?;
        points.push(crate::benchmarks::SpectrumPoint {
            f_norm: parse_f64(a, ln + 1)?,
            t_db: parse_f64(b, ln + 1)?,
        });
    }
    Ok(Spectrum {
        points,
        filling_fraction,
        curvature,
    })
}

pub fn bandgaps_to_csv(sets: &[BandgapSet]) -> String {
    let mut out = String::from(BANDGAP_HEADER);
    out.push('\n');
    for set in sets {
        for &(lo, hi) in &set.intervals {
            let _ = writeln!(out, "{},{},{}", fmt_f64(set.filling_fraction), fmt_f64(lo), fmt_f64(hi));
        }
    }
    out
}

pub fn stencils_to_csv(stencils: &[StencilWeights]) -> String {
    let mut out = String::from(STENCIL_HEADER);
    out.push('\n');
    for st in stencils {
        let support: Vec<usize> = st.support().collect();
        for d in Derivative::ALL {
            for (&j, &w) in support.iter().zip(st.weights(d)) {
                let _ = writeln!(out, "{},{j},{},{}", st.center, d.code(), fmt_f64(w));
            }
        }
    }
    out
}

/// Legacy VTK polydata with one vertex per node and `re_u`, `im_u`, `abs_u` point data.
pub fn field_to_vtk(cloud: &SurfaceCloud, field: &ComplexField) -> String {
    let n = cloud.len();
    let mut out = String::with_capacity(n * 160);
    out.push_str("# vtk DataFile Version 3.0\nmanifold-gfdm field\nASCII\nDATASET POLYDATA\n");
    let _ = writeln!(out, "POINTS {n} double");
    for x in &cloud.positions {
        let _ = writeln!(out, "{} {} {}", fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(x[2]));
    }
    let _ = writeln!(out, "VERTICES {n} {}", 2 * n);
    for i in 0..n {
        let _ = writeln!(out, "1 {i}");
    }
    let _ = writeln!(out, "POINT_DATA {n}");
    let arrays: [(&str, fn(&Complex64) -> f64); 3] = [("re_u", |u| u.re), ("im_u", |u| u.im), ("abs_u", |u| u.norm())];
    for (name, f) in arrays {
        let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for u in &field.values {
            out.push_str(&fmt_f64(f(u)));
            out.push('\n');
        }
    }
    out
}

pub fn write_field_vtk(path: &Path, cloud: &SurfaceCloud, field: &ComplexField) -> Result<()> {
    atomic_write(path, field_to_vtk(cloud, field).as_bytes())
}

/// Points and named scalar arrays read back from a file written by [`field_to_vtk`].
#[derive(Debug, Clone, PartialEq)]
pub struct VtkPointData {
    pub points: Vec<Vec3>,
    pub arrays: Vec<(String, Vec<f64>)>,
}

impl VtkPointData {
    pub fn array(&self, name: &str) -> Option<&[f64]> {
        self.arrays.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

pub fn parse_vtk(text: &str) -> Result<VtkPointData> {
    let mut tokens = text.lines().skip(3).flat_map(str::split_whitespace);
    let mut expect = |want: &str| match tokens.next() {
        Some(t) if t == want => Ok(()),
        other => Err(GfdmError::Parse(format!("expected `{want}`, found {other:?}"))),
    };
    expect("DATASET")?;
    expect("POLYDATA")?;
    expect("POINTS")?;
    let rest: Vec<&str> = text.lines().skip(3).flat_map(str::split_whitespace).skip(3).collect();
    let mut it = rest.into_iter();
    let mut next = || it.next().ok_or_else(|| GfdmError::Parse("unexpected end of VTK file".into()));
    let n: usize = next()?.parse().map_err(|_| GfdmError::Parse("bad point count".into()))?;
    next()?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let x = parse_f64(next()?, 0)?;
        let y = parse_f64(next()?, 0)?;
        let z = parse_f64(next()?, 0)?;
        points.push(Vec3::new(x, y, z));
    }
    let mut arrays = Vec::new();
    while let Ok(tok) = next() {
        match tok {
            "VERTICES" => {
                next()?;
                let size: usize = next()?.parse().map_err(|_| GfdmError::Parse("bad VERTICES size".into()))?;
                for _ in 0..size {
                    next()?;
                }
            }
            "POINT_DATA" => {
                next()?;
            }
            "SCALARS" => {
                let name = next()?.to_string();
                next()?;
                next()?;
                if next()? != "LOOKUP_TABLE" {
                    return Err(GfdmError::Parse("expected LOOKUP_TABLE".into()));
                }
                next()?;
                let values = (0..n).map(|_| parse_f64(next()?, 0)).collect::<Result<Vec<_>>>()?;
                arrays.push((name, values));
            }
            other => return Err(GfdmError::Parse(format!("unexpected VTK token `{other}`"))),
        }
    }
    Ok(VtkPointData { points, arrays })
}

/// Matrix Market text of the system matrix (complex general coordinate, 1-based).
pub fn matrix_market(system: &SparseSystem) -> Result<String> {
    let a = system.to_csc()?;
    let entries = a.to_row_major();
    let mut out = String::with_capacity(entries.len() * 60);
    out.push_str("%%MatrixMarket matrix coordinate complex general\n");
    let _ = writeln!(out, "{} {} {}", system.n, system.n, entries.len());
    for (r, c, v) in entries {
        let _ = writeln!(out, "{} {} {} {}", r + 1, c + 1, fmt_f64(v.re), fmt_f64(v.im));
    }
    Ok(out)
}

/// Matrix Market dense array of the right-hand side.
pub fn rhs_matrix_market(system: &SparseSystem) -> String {
    let mut out = String::from("%%MatrixMarket matrix array complex general\n");
    let _ = writeln!(out, "{} 1", system.n);
    for b in &system.rhs {
        let _ = writeln!(out, "{} {}", fmt_f64(b.re), fmt_f64(b.im));
    }
    out
}

/// Parses a complex coordinate Matrix Market file into 0-based triplets.
pub fn parse_matrix_market(text: &str) -> Result<(usize, usize, Vec<(usize, usize, Complex64)>)> {
    let mut lines = text.lines().filter(|l| !l.starts_with('%') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| GfdmError::Parse("empty Matrix Market file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| GfdmError::Parse(format!("bad size line `{header}`"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(GfdmError::Parse(format!("bad size line `{header}`")));
    }
    let mut triplets = Vec::with_capacity(dims[2]);
    for (ln, line) in lines.enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(GfdmError::Parse(format!("entry {}: expected 4 fields", ln + 1)));
        }
        let r: usize = f[0].parse().map_err(|_| GfdmError::Parse(format!("bad row `{}`", f[0])))?;
        let c: usize = f[1].parse().map_err(|_| GfdmError::Parse(format!("bad column `{}`", f[1])))?;
        triplets.push((r - 1, c - 1, Complex64::new(parse_f64(f[2], ln)?, parse_f64(f[3], ln)?)));
    }
    Ok((dims[0], dims[1], triplets))
}
