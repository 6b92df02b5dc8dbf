//! Node generation: relaxed Fibonacci spheres, structured strips and
//! quasi-uniform clouds on star-shaped implicit surfaces.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cloud::{BoundaryTag, PatchEdge, Region, SurfaceCloud};
use super::surface::{mean_curvature_term, normal_at, Cylinder, ImplicitSurface, Plane};
use crate::spatial::KdTree;
use crate::{par, GfdmError, Result, Vec3};

/// Options for [`sample_sphere_with`].
#[derive(Debug, Clone, Copy)]
pub struct SphereSampling {
    /// Riesz-energy relaxation sweeps after the Fibonacci initialization.
    pub relax_iterations: usize,
}

impl Default for SphereSampling {
    fn default() -> Self {
        Self {
            relax_iterations: 40,
        }
    }
}

/// Fibonacci lattice on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// `n` quasi-uniform nodes on the unit sphere with default relaxation.
pub fn sample_sphere(n: usize) -> Result<SurfaceCloud> {
    sample_sphere_with(n, SphereSampling::default())
}

pub fn sample_sphere_with(n: usize, opts: SphereSampling) -> Result<SurfaceCloud> {
    if n < 4 {
        return Err(GfdmError::InvalidSampling(format!(
            "sphere needs at least 4 nodes, got {n}"
        )));
    }
    let mut pts = fibonacci_sphere(n);
    let spacing = (4.0 * PI / n as f64).sqrt();
    let project = |x: Vec3| x.normalize();
    // Small sets relax to convergence so the energy optimum is actually reached.
    let iterations = if n <= 64 {
        opts.relax_iterations.max(4000)
    } else {
        opts.relax_iterations
    };
    if opts.relax_iterations > 0 {
        riesz_relax(&mut pts, spacing, iterations, &project);
    }
    let mut cloud = SurfaceCloud::default();
    for x in pts {
        cloud.push_interior(x, x, 2.0);
    }
    Ok(cloud)
}

/// Truncated Riesz `s = 2` repulsion, restricted to the surface by `project`.
fn riesz_relax<P: Fn(Vec3) -> Vec3 + Sync>(
    pts: &mut [Vec3],
    spacing: f64,
    iterations: usize,
    project: &P,
) {
    let cutoff = 3.0 * spacing;
    let step = 0.02 * spacing.powi(4);
    let max_move = 0.2 * spacing;
    for _ in 0..iterations {
        let tree = KdTree::new(pts);
        let snapshot: &[Vec3] = pts;
        let moved: Vec<(Vec3, f64)> = par::map_indices(snapshot.len(), |i| {
            let xi = snapshot[i];
            let mut force = Vec3::zeros();
            for j in tree.within(&xi, cutoff) {
                if j == i {
                    continue;
                }
                let d = xi - snapshot[j];
                let r2 = d.norm_squared();
                force += d / (r2 * r2);
            }
            let mut delta = force * step;
            let len = delta.norm();
            if len > max_move {
                delta *= max_move / len;
            }
            let next = project(xi + delta);
            let shift = (next - xi).norm();
            (next, shift)
        });
        let mut largest = 0.0f64;
        for (p, (next, shift)) in pts.iter_mut().zip(moved) {
            *p = next;
            largest = largest.max(shift);
        }
        if largest < 1e-13 * spacing {
            break;
        }
    }
}

/// Geometry of a strip in arc-length coordinates `(s, y)`,
/// `s in [-L/2, L/2]`, `y = x2 in [-lambda, lambda]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StripShape {
    /// Portion of the cylinder `x1^2 + x3^2 = R^2`, centred on the `+x3` axis.
    Cylinder { radius: f64 },
    /// The plane `x3 = 0`.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripSpec {
    pub shape: StripShape,
    pub arc_length: f64,
    pub half_width: f64,
    pub spacing: f64,
}

impl StripSpec {
    /// Curved strip of curvature `ka` (`ka = 0` gives the flat strip).
    pub fn with_curvature(ka: f64, arc_length: f64, half_width: f64, spacing: f64) -> Self {
        let shape = if ka == 0.0 {
            StripShape::Flat
        } else {
            StripShape::Cylinder { radius: 1.0 / ka }
        };
        Self {
            shape,
            arc_length,
            half_width,
            spacing,
        }
    }

    pub fn point(&self, s: f64, y: f64) -> Vec3 {
        match self.shape {
            StripShape::Cylinder { radius } => {
                let phi = s / radius;
                Vec3::new(radius * phi.sin(), y, radius * phi.cos())
            }
            StripShape::Flat => Vec3::new(s, y, 0.0),
        }
    }

    pub fn normal(&self, s: f64) -> Vec3 {
        match self.shape {
            StripShape::Cylinder { radius } => {
                let phi = s / radius;
                Vec3::new(phi.sin(), 0.0, phi.cos())
            }
            StripShape::Flat => Vec3::new(0.0, 0.0, 1.0),
        }
    }

    /// Unit tangent in the direction of increasing `s`.
    pub fn tangent(&self, s: f64) -> Vec3 {
        match self.shape {
            StripShape::Cylinder { radius } => {
                let phi = s / radius;
                Vec3::new(phi.cos(), 0.0, -phi.sin())
            }
            StripShape::Flat => Vec3::new(1.0, 0.0, 0.0),
        }
    }

    pub fn hs(&self) -> f64 {
        match self.shape {
            StripShape::Cylinder { radius } => 1.0 / radius,
            StripShape::Flat => 0.0,
        }
    }

    /// Arc coordinate of a point on the strip.
    pub fn arc_of(&self, x: &Vec3) -> f64 {
        match self.shape {
            StripShape::Cylinder { radius } => radius * x[0].atan2(x[2]),
            StripShape::Flat => x[0],
        }
    }

    pub fn surface(&self) -> Box<dyn ImplicitSurface> {
        match self.shape {
            StripShape::Cylinder { radius } => Box::new(Cylinder { radius }),
            StripShape::Flat => Box::new(Plane::default()),
        }
    }

    fn validate(&self) -> Result<()> {
        if let StripShape::Cylinder { radius } = self.shape {
            if !(radius > 0.0) {
                return Err(GfdmError::InvalidPatch(format!("radius {radius} must be positive")));
            }
            let theta = self.arc_length / radius;
            if !(theta > 0.0 && theta <= PI * (1.0 + 1e-12)) {
                return Err(GfdmError::InvalidPatch(format!(
                    "central angle {theta} outside (0, pi]"
                )));
            }
        }
        if !(self.arc_length > 0.0 && self.half_width > 0.0) {
            return Err(GfdmError::InvalidPatch(
                "arc length and half width must be positive".into(),
            ));
        }
        if !(self.spacing > 0.0) || self.spacing > 0.5 * self.arc_length.min(2.0 * self.half_width) {
            return Err(GfdmError::InvalidPatch(format!(
                "spacing {} does not fit the patch",
                self.spacing
            )));
        }
        Ok(())
    }
}

/// Structured nodes on a portion of the cylinder `x1^2 + x3^2 = R^2`
/// subtending `theta`, with `|x2| <= lambda` and target spacing `dh`.
pub fn sample_cylinder_patch(radius: f64, theta: f64, lambda: f64, dh: f64) -> Result<SurfaceCloud> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(GfdmError::InvalidPatch(format!("theta {theta} outside (0, pi]")));
    }
    sample_strip(&StripSpec {
        shape: StripShape::Cylinder { radius },
        arc_length: theta * radius,
        half_width: lambda,
        spacing: dh,
    })
}

/// Structured grid on a strip. Edge nodes are tagged `GammaN` and carry their
/// [`PatchEdge`]; the arc ends (`Gamma1`, `Gamma3`) own the corners.
pub fn sample_strip(spec: &StripSpec) -> Result<SurfaceCloud> {
    spec.validate()?;
    let ns = ((spec.arc_length / spec.spacing).round() as usize).max(2);
    let ny = ((2.0 * spec.half_width / spec.spacing).round() as usize).max(2);
    let half = 0.5 * spec.arc_length;
    let lam = spec.half_width;
    let mut cloud = SurfaceCloud::default();
    let hs = spec.hs();
    for i in 0..=ns {
        let s = match i {
            0 => -half,
            _ if i == ns => half,
            _ => -half + spec.arc_length * i as f64 / ns as f64,
        };
        for j in 0..=ny {
            let y = match j {
                0 => -lam,
                _ if j == ny => lam,
                _ => -lam + 2.0 * lam * j as f64 / ny as f64,
            };
            let (edge, conormal) = if i == 0 {
                (Some(PatchEdge::Gamma1), Some(-spec.tangent(s)))
            } else if i == ns {
                (Some(PatchEdge::Gamma3), Some(spec.tangent(s)))
            } else if j == 0 {
                (Some(PatchEdge::Gamma2), Some(Vec3::new(0.0, -1.0, 0.0)))
            } else if j == ny {
                (Some(PatchEdge::Gamma4), Some(Vec3::new(0.0, 1.0, 0.0)))
            } else {
                (None, None)
            };
            let tag = if edge.is_some() {
                BoundaryTag::GammaN
            } else {
                BoundaryTag::Interior
            };
            cloud.push(
                spec.point(s, y),
                spec.normal(s),
                hs,
                Region::Matrix,
                tag,
                edge,
                conormal,
            );
        }
    }
    Ok(cloud)
}

/// Options for [`sample_implicit`].
#[derive(Debug, Clone, Copy)]
pub struct ImplicitSampling {
    pub target_nodes: usize,
    pub seed: u64,
    /// Candidate pool size as a multiple of `target_nodes`.
    pub oversampling: usize,
    pub relax_iterations: usize,
    /// Upper bound on the ray parameter when locating the surface.
    pub max_radius: f64,
}

impl ImplicitSampling {
    pub fn new(target_nodes: usize) -> Self {
        Self {
            target_nodes,
            seed: 0x5eed_cd9,
            oversampling: 24,
            relax_iterations: 30,
            max_radius: 4.0,
        }
    }
}

/// Quasi-uniform nodes on a closed surface that is star-shaped about the origin.
///
/// Area-uniform random candidates (ray casting with rejection on the area
/// element) are thinned by Poisson-disk elimination to roughly
/// `target_nodes`, then relaxed by projected Riesz repulsion. Normals come
/// from the level-set gradient and `H_S` from [`mean_curvature_term`].
pub fn sample_implicit(surface: &dyn ImplicitSurface, opts: &ImplicitSampling) -> Result<SurfaceCloud> {
    let n = opts.target_nodes;
    if n < 4 {
        return Err(GfdmError::InvalidSampling(format!("need at least 4 nodes, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cast = |d: &Vec3| -> Result<(Vec3, f64)> {
        let x = ray_surface_point(surface, d, opts.max_radius)?;
        let normal = normal_at(surface, &x)?;
        // dA / dOmega = r^2 / |d . n|
        let w = x.norm_squared() / d.dot(&normal).abs().max(1e-6);
        Ok((x, w))
    };

    let pilot: Vec<(Vec3, f64)> = fibonacci_sphere(4096)
        .iter()
        .map(&cast)
        .collect::<Result<_>>()?;
    let w_max = pilot.iter().map(|p| p.1).fold(0.0, f64::max) * 1.2;
    let area_estimate = 4.0 * PI * pilot.iter().map(|p| p.1).sum::<f64>() / pilot.len() as f64;

    let pool_size = opts.oversampling * n;
    let mut pool = Vec::with_capacity(pool_size);
    while pool.len() < pool_size {
        let d = random_direction(&mut rng);
        let (x, w) = cast(&d)?;
        if rng.random::<f64>() * w_max <= w {
            pool.push(x);
        }
    }
    pool.shuffle(&mut rng);

    // Poisson-disk thinning; bisection on the disk radius to hit `n`.
    let base = (area_estimate / n as f64).sqrt();
    let (mut lo, mut hi) = (0.3 * base, 1.5 * base);
    let mut best = poisson_thin(&pool, 0.8 * base);
    for _ in 0..40 {
        let r = 0.5 * (lo + hi);
        let kept = poisson_thin(&pool, r);
        if kept.len() > n {
            lo = r;
        } else {
            hi = r;
        }
        if kept.len().abs_diff(n) < best.len().abs_diff(n) {
            best = kept;
        }
        if best.len().abs_diff(n) * 200 <= n {
            break;
        }
    }
    let mut pts: Vec<Vec3> = best.into_iter().map(|i| pool[i]).collect();

    let spacing = (area_estimate / pts.len() as f64).sqrt();
    let project = |x: Vec3| newton_project(surface, x);
    riesz_relax(&mut pts, spacing, opts.relax_iterations, &project);

    let mut cloud = SurfaceCloud::default();
    for x in pts {
        let normal = normal_at(surface, &x)?;
        let hs = mean_curvature_term(surface, &x)?;
        cloud.push_interior(x, normal, hs);
    }
    Ok(cloud)
}

fn random_direction<R: Rng>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// First crossing of the level set along the ray `t * dir`, `t in (0, t_max]`.
fn ray_surface_point(surface: &dyn ImplicitSurface, dir: &Vec3, t_max: f64) -> Result<Vec3> {
    let f = |t: f64| surface.level_set(&(dir * t));
    let steps = 400;
    let mut a = 0.0;
    if f(a) >= 0.0 {
        return Err(GfdmError::InvalidSampling(format!(
            "origin is not inside {}",
            surface.name()
        )));
    }
    for k in 1..=steps {
        let b = t_max * k as f64 / steps as f64;
        let fb = f(b);
        if fb >= 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * t_max {
                    break;
                }
            }
            return Ok(newton_project(surface, dir * (0.5 * (lo + hi))));
        }
        a = b;
    }
    Err(GfdmError::InvalidSampling(format!(
        "ray {dir:?} does not reach {} within t = {t_max}",
        surface.name()
    )))
}

/// Newton projection onto the zero level set along the gradient.
pub(crate) fn newton_project(surface: &dyn ImplicitSurface, mut x: Vec3) -> Vec3 {
    let tol = 1e-14 * surface.scale();
    for _ in 0..50 {
        let f = surface.level_set(&x);
        if f.abs() <= tol {
            break;
        }
        let g = surface.gradient(&x);
        let g2 = g.norm_squared();
        if g2 == 0.0 {
            break;
        }
        x -= g * (f / g2);
    }
    x
}

/// Greedy Poisson-disk elimination in pool order; returns kept indices.
fn poisson_thin(pool: &[Vec3], radius: f64) -> Vec<usize> {
    let cell = |x: &Vec3| -> (i64, i64, i64) {
        (
            (x[0] / radius).floor() as i64,
            (x[1] / radius).floor() as i64,
            (x[2] / radius).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let mut kept = Vec::new();
    let r2 = radius * radius;
    for (i, x) in pool.iter().enumerate() {
        let (cx, cy, cz) = cell(x);
        let mut free = true;
        'scan: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = grid.get(&(cx + dx, cy + dy, cz + dz)) {
                        if bucket.iter().any(|&j| (pool[j] - x).norm_squared() < r2) {
                            free = false;
                            break 'scan;
                        }
                    }
                }
            }
        }
        if free {
            grid.entry((cx, cy, cz)).or_default().push(i);
            kept.push(i);
        }
    }
    kept
}
