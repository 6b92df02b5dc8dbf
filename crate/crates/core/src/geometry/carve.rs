//! Holes, inclusions and periodic pairing on strips.

use std::f64::consts::PI;

use super::cloud::{BoundaryTag, Region, SurfaceCloud};
use super::sampling::{StripShape, StripSpec};
use super::surface::RotationAboutX2;
use crate::spatial::KdTree;
use crate::{GfdmError, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscMode {
    /// Nodes inside are removed; the rim is a free (zero-flux) edge.
    Hole,
    /// Nodes inside become `Region::Inclusion`; the rim carries duplicated
    /// interface nodes, one per side.
    Inclusion,
}

/// A disc `X1^2 + (X2 - center_y)^2 <= r^2` in the frame `X = J x` rotated
/// about `x2` by `alpha = center_arc / R` (a plain shift by `center_arc` on a
/// flat strip).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center_arc: f64,
    pub center_y: f64,
    pub radius: f64,
    pub mode: DiscMode,
}

impl Disc {
    pub fn rotation(&self, strip: &StripSpec) -> Option<RotationAboutX2> {
        match strip.shape {
            StripShape::Cylinder { radius } => Some(RotationAboutX2::new(self.center_arc / radius)),
            StripShape::Flat => None,
        }
    }

    /// Offsets `(X1, X2 - center_y)` of `x` in the disc frame, or `None` on
    /// the far side of the cylinder.
    pub fn local_offset(&self, strip: &StripSpec, x: &Vec3) -> Option<(f64, f64)> {
        match self.rotation(strip) {
            Some(rot) => {
                let big = rot.apply(x);
                (big[2] > 0.0).then_some((big[0], big[1] - self.center_y))
            }
            None => Some((x[0] - self.center_arc, x[1] - self.center_y)),
        }
    }

    pub fn contains(&self, strip: &StripSpec, x: &Vec3) -> bool {
        self.local_offset(strip, x)
            .is_some_and(|(a, b)| a * a + b * b <= self.radius * self.radius)
    }

    /// Radial coordinate `sqrt(X1^2 + X2'^2)` in the disc frame.
    fn rho(&self, strip: &StripSpec, x: &Vec3) -> Option<f64> {
        self.local_offset(strip, x).map(|(a, b)| a.hypot(b))
    }

    /// Point on the rim at polar angle `t` in the disc frame.
    pub fn rim_point(&self, strip: &StripSpec, t: f64) -> (f64, f64) {
        let x1 = self.radius * t.cos();
        let y = self.center_y + self.radius * t.sin();
        let s = match strip.shape {
            StripShape::Cylinder { radius } => radius * (self.center_arc / radius + (x1 / radius).asin()),
            StripShape::Flat => self.center_arc + x1,
        };
        (s, y)
    }

    /// Unit conormal at a rim point pointing out of the disc.
    fn outward_conormal(&self, strip: &StripSpec, x: &Vec3, normal: &Vec3) -> Vec3 {
        let (a, b) = self.local_offset(strip, x).expect("rim point on the near side");
        let dx1 = match self.rotation(strip) {
            Some(rot) => Vec3::new(rot.matrix[(0, 0)], rot.matrix[(0, 1)], rot.matrix[(0, 2)]),
            None => Vec3::new(1.0, 0.0, 0.0),
        };
        let grad = dx1 * a + Vec3::new(0.0, 1.0, 0.0) * b;
        let tangential = grad - normal * normal.dot(&grad);
        tangential.normalize()
    }
}

/// The 5x5 hole lattice on the unit half cylinder: radius 0.1, rotations
/// `alpha_j = -0.9 + 0.3 j` and centres `x2 = 0.3 i - 0.9`.
pub fn hole_lattice_5x5(strip: &StripSpec) -> Vec<Disc> {
    let radius = match strip.shape {
        StripShape::Cylinder { radius } => radius,
        StripShape::Flat => 1.0,
    };
    let mut discs = Vec::with_capacity(25);
    for j in 1..=5 {
        let alpha = -0.9 + 0.3 * j as f64;
        for i in 1..=5 {
            discs.push(Disc {
                center_arc: alpha * radius,
                center_y: 0.3 * i as f64 - 0.9,
                radius: 0.1,
                mode: DiscMode::Hole,
            });
        }
    }
    discs
}

/// Inclusion radius for a filling fraction `F_f = pi r^2`.
pub fn inclusion_radius(filling_fraction: f64) -> f64 {
    (filling_fraction / PI).sqrt()
}

/// Removes or re-tags nodes inside the discs and places a rim layer of
/// nodes on each disc boundary at arc spacing close to `spacing`.
///
/// Grid nodes within `0.4 * spacing` of a rim (in the disc frame) are dropped
/// so that rim nodes are not crowded. Patch-edge nodes are never touched.
pub fn carve_and_classify(
    cloud: &SurfaceCloud,
    strip: &StripSpec,
    discs: &[Disc],
    spacing: f64,
) -> Result<SurfaceCloud> {
    let half = 0.5 * strip.arc_length;
    for (k, d) in discs.iter().enumerate() {
        let inside_strip = d.center_y.abs() + d.radius < strip.half_width
            && d.center_arc.abs() + d.radius < half;
        if !inside_strip || !(d.radius > 0.0) {
            return Err(GfdmError::InvalidPatch(format!(
                "disc {k} does not lie strictly inside the strip"
            )));
        }
    }

    let band = 0.4 * spacing;
    let mut out = cloud.clone();
    let mut keep = vec![true; cloud.len()];
    let mut owner: Vec<Option<usize>> = vec![None; cloud.len()];
    for i in 0..cloud.len() {
        let x = &cloud.positions[i];
        for (k, d) in discs.iter().enumerate() {
            let Some(rho) = d.rho(strip, x) else { continue };
            if rho > d.radius + band {
                continue;
            }
            if let Some(prev) = owner[i] {
                return Err(GfdmError::OverlappingInclusions {
                    first: prev,
                    second: k,
                    node: i,
                });
            }
            owner[i] = Some(k);
            if cloud.edge[i].is_some() {
                continue;
            }
            if (rho - d.radius).abs() < band {
                keep[i] = false;
            } else if rho < d.radius {
                match d.mode {
                    DiscMode::Hole => keep[i] = false,
                    DiscMode::Inclusion => out.region[i] = Region::Inclusion,
                }
            }
        }
    }
    out.retain(&keep);

    let surface_hs = strip.hs();
    for d in discs {
        let count = ((2.0 * PI * d.radius / spacing).round() as usize).max(8);
        for k in 0..count {
            let t = 2.0 * PI * k as f64 / count as f64;
            let (s, y) = d.rim_point(strip, t);
            let x = strip.point(s, y);
            let normal = strip.normal(s);
            let outward = d.outward_conormal(strip, &x, &normal);
            let matrix_side = out.push(
                x,
                normal,
                surface_hs,
                Region::Matrix,
                BoundaryTag::Gamma0Matrix,
                None,
                Some(-outward),
            );
            if d.mode == DiscMode::Inclusion {
                let inclusion_side = out.push(
                    x,
                    normal,
                    surface_hs,
                    Region::Inclusion,
                    BoundaryTag::Gamma0Inclusion,
                    None,
                    Some(outward),
                );
                out.interface_pairs.push((matrix_side, inclusion_side));
            }
        }
    }
    Ok(out)
}

/// Matches every `GammaP1` node to the `GammaP2` node at `x + a`.
pub fn pair_periodic(cloud: &SurfaceCloud, a: &Vec3, tol: f64) -> Result<SurfaceCloud> {
    let p1 = cloud.indices_with(BoundaryTag::GammaP1);
    let p2 = cloud.indices_with(BoundaryTag::GammaP2);
    let p2_pos: Vec<Vec3> = p2.iter().map(|&i| cloud.positions[i]).collect();
    let tree = KdTree::new(&p2_pos);
    let mut used = vec![false; p2.len()];
    let mut pairs = Vec::with_capacity(p1.len());
    for &i in &p1 {
        let target = cloud.positions[i] + a;
        let hit = tree
            .nearest(&target, 1, |_| true)
            .first()
            .copied()
            .filter(|&k| (p2_pos[k] - target).norm_squared() <= tol * tol && !used[k]);
        match hit {
            Some(k) => {
                used[k] = true;
                pairs.push((i, p2[k]));
            }
            None => return Err(GfdmError::UnmatchedPeriodicNode { node: i, tol }),
        }
    }
    if let Some(k) = used.iter().position(|&u| !u) {
        return Err(GfdmError::UnmatchedPeriodicNode { node: p2[k], tol });
    }
    let mut out = cloud.clone();
    out.periodic_pairs = pairs;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cloud::EdgeConditions;
    use crate::geometry::sampling::sample_strip;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn periodic_strip(spacing: f64) -> (StripSpec, SurfaceCloud) {
        let spec = StripSpec::with_curvature(PI / 16.0, 16.0, 0.5, spacing);
        let mut cloud = sample_strip(&spec).unwrap();
        cloud.apply_edge_conditions(&EdgeConditions {
            gamma1: BoundaryTag::GammaI,
            gamma2: BoundaryTag::GammaP1,
            gamma3: BoundaryTag::GammaA,
            gamma4: BoundaryTag::GammaP2,
        });
        (spec, cloud)
    }

    #[test]
    fn identity_rotation_disc_contains_its_center() {
        let spec = StripSpec::with_curvature(1.0, PI, 1.5, 0.05);
        let disc = Disc {
            center_arc: 0.0,
            center_y: 0.0,
            radius: 0.1,
            mode: DiscMode::Hole,
        };
        assert_eq!(disc.rotation(&spec).unwrap().alpha, 0.0);
        assert!(disc.contains(&spec, &spec.point(0.0, 0.0)));
        assert!(!disc.contains(&spec, &spec.point(0.2, 0.0)));
    }

    #[test]
    fn filling_fraction_radius() {
        assert!((inclusion_radius(0.4) - 0.35682).abs() < 5e-6);
    }

    #[test]
    fn holes_never_remove_edge_nodes() {
        let spec = StripSpec::with_curvature(1.0, PI, 1.5, 0.05);
        let cloud = sample_strip(&spec).unwrap();
        let edges_before = cloud.edge.iter().filter(|e| e.is_some()).count();
        let carved = carve_and_classify(&cloud, &spec, &hole_lattice_5x5(&spec), 0.05).unwrap();
        let edges_after = carved.edge.iter().filter(|e| e.is_some()).count();
        assert_eq!(edges_before, edges_after);
        let discs = hole_lattice_5x5(&spec);
        for i in 0..carved.len() {
            if carved.boundary[i] != BoundaryTag::Gamma0Matrix {
                let x = &carved.positions[i];
                assert!(discs.iter().all(|d| !d.contains(&spec, x)));
            }
        }
        carved.validate().unwrap();
        assert!(carved.interface_pairs.is_empty());
        assert!((0..carved.len()).filter(|&i| carved.is_hole_rim(i)).count() > 25 * 8);
    }

    #[test]
    fn rim_conormals_point_into_the_hole() {
        let spec = StripSpec::with_curvature(1.0, PI, 1.5, 0.05);
        let cloud = sample_strip(&spec).unwrap();
        let discs = hole_lattice_5x5(&spec);
        let carved = carve_and_classify(&cloud, &spec, &discs, 0.05).unwrap();
        for i in carved.indices_with(BoundaryTag::Gamma0Matrix) {
            let x = carved.positions[i];
            let c = carved.conormals[i].unwrap();
            let d = discs.iter().find(|d| d.rho(&spec, &x).unwrap_or(9.0) < 0.1 + 1e-9).unwrap();
            assert!(d.contains(&spec, &(x + 0.01 * c)));
            assert!(!d.contains(&spec, &(x - 0.01 * c)));
        }
    }

    #[test]
    fn inclusions_create_coincident_duplicates() {
        let (spec, cloud) = periodic_strip(0.05);
        let r = inclusion_radius(0.4);
        let discs: Vec<Disc> = (1..=9)
            .map(|j| Disc {
                center_arc: (j as f64 - 5.0),
                center_y: 0.0,
                radius: r,
                mode: DiscMode::Inclusion,
            })
            .collect();
        let carved = carve_and_classify(&cloud, &spec, &discs, 0.05).unwrap();
        assert!(!carved.interface_pairs.is_empty());
        for &(a, b) in &carved.interface_pairs {
            assert_eq!(carved.positions[a], carved.positions[b]);
            assert_eq!(carved.region[a], Region::Matrix);
            assert_eq!(carved.region[b], Region::Inclusion);
            let dot = carved.conormals[a].unwrap().dot(&carved.conormals[b].unwrap());
            assert!((dot + 1.0).abs() < 1e-12);
        }
        carved.validate().unwrap();
    }

    #[test]
    fn overlapping_discs_rejected() {
        let (spec, cloud) = periodic_strip(0.05);
        let discs = [0.0, 0.3].map(|c| Disc {
            center_arc: c,
            center_y: 0.0,
            radius: 0.2,
            mode: DiscMode::Inclusion,
        });
        let err = carve_and_classify(&cloud, &spec, &discs, 0.05).unwrap_err();
        assert!(matches!(err, GfdmError::OverlappingInclusions { .. }));
    }

    #[test]
    fn periodic_pairs_exact_on_lattice() {
        let (_, cloud) = periodic_strip(0.1);
        let a = Vec3::new(0.0, 1.0, 0.0);
        for tol in [0.0, 0.01] {
            let paired = pair_periodic(&cloud, &a, tol).unwrap();
            assert_eq!(paired.periodic_pairs.len(), cloud.count(BoundaryTag::GammaP1));
            for &(i, j) in &paired.periodic_pairs {
                assert_eq!(paired.positions[i] + a, paired.positions[j]);
                assert_eq!(paired.positions[i][1], -0.5);
            }
        }
    }

    #[test]
    fn jittered_interior_does_not_change_pairing() {
        let (spec, cloud) = periodic_strip(0.1);
        let a = Vec3::new(0.0, 1.0, 0.0);
        let reference = pair_periodic(&cloud, &a, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut jittered = cloud.clone();
        for i in 0..jittered.len() {
            if jittered.edge[i].is_some() {
                continue;
            }
            let x = jittered.positions[i];
            let s = spec.arc_of(&x) + 0.03 * rng.random_range(-1.0..1.0);
            let y = x[1] + 0.03 * rng.random_range(-1.0..1.0);
            jittered.positions[i] = spec.point(s, y);
        }
        let paired = pair_periodic(&jittered, &a, 0.01).unwrap();
        // brute-force oracle: nearest translate among all GammaP2 nodes
        let p2 = jittered.indices_with(BoundaryTag::GammaP2);
        for &(i, j) in &paired.periodic_pairs {
            let target = jittered.positions[i] + a;
            let best = *p2
                .iter()
                .min_by(|&&u, &&v| {
                    (jittered.positions[u] - target)
                        .norm()
                        .total_cmp(&(jittered.positions[v] - target).norm())
                })
                .unwrap();
            assert_eq!(best, j);
        }
        assert_eq!(paired.periodic_pairs, reference.periodic_pairs);
    }

    #[test]
    fn unmatched_periodic_node_reported() {
        let (_, mut cloud) = periodic_strip(0.1);
        let victim = cloud.indices_with(BoundaryTag::GammaP2)[3];
        cloud.positions[victim][0] += 0.05;
        let err = pair_periodic(&cloud, &Vec3::new(0.0, 1.0, 0.0), 0.01).unwrap_err();
        assert!(matches!(err, GfdmError::UnmatchedPeriodicNode { .. }));
    }
}
