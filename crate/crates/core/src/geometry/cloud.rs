//! Tagged node clouds.

use crate::{GfdmError, Result, Vec3};

/// Material side a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Matrix domain `D1`.
    Matrix,
    /// Inclusion domain `D2`.
    Inclusion,
}

impl Region {
    pub fn code(self) -> u8 {
        match self {
            Region::Matrix => 1,
            Region::Inclusion => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(Region::Matrix),
            2 => Some(Region::Inclusion),
            _ => None,
        }
    }
}

/// Which equation a node carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Interior,
    /// Incident excitation, `u = C`.
    GammaI,
    /// First-order absorbing condition.
    GammaA,
    /// Zero flux.
    GammaN,
    /// Periodic source side.
    GammaP1,
    /// Periodic image side, `x_P2 = x_P1 + a`.
    GammaP2,
    /// Interface node on the matrix side. Without an interface partner it is a
    /// free hole rim.
    Gamma0Matrix,
    /// Interface node on the inclusion side.
    Gamma0Inclusion,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 8] = [
        BoundaryTag::Interior,
        BoundaryTag::GammaI,
        BoundaryTag::GammaA,
        BoundaryTag::GammaN,
        BoundaryTag::GammaP1,
        BoundaryTag::GammaP2,
        BoundaryTag::Gamma0Matrix,
        BoundaryTag::Gamma0Inclusion,
    ];

    pub fn code(self) -> u8 {
        match self {
            BoundaryTag::Interior => 0,
            BoundaryTag::GammaI => 1,
            BoundaryTag::GammaA => 2,
            BoundaryTag::GammaN => 3,
            BoundaryTag::GammaP1 => 4,
            BoundaryTag::GammaP2 => 5,
            BoundaryTag::Gamma0Matrix => 6,
            BoundaryTag::Gamma0Inclusion => 7,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn is_boundary(self) -> bool {
        self != BoundaryTag::Interior
    }
}

/// The four edges of a rectangular strip/patch in arc-length coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatchEdge {
    /// Arc start, `s = -L/2`.
    Gamma1,
    /// `x2 = -lambda`.
    Gamma2,
    /// Arc end, `s = +L/2`.
    Gamma3,
    /// `x2 = +lambda`.
    Gamma4,
}

/// Physical condition assigned to each patch edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeConditions {
    pub gamma1: BoundaryTag,
    pub gamma2: BoundaryTag,
    pub gamma3: BoundaryTag,
    pub gamma4: BoundaryTag,
}

impl EdgeConditions {
    pub fn tag_for(&self, edge: PatchEdge) -> BoundaryTag {
        match edge {
            PatchEdge::Gamma1 => self.gamma1,
            PatchEdge::Gamma2 => self.gamma2,
            PatchEdge::Gamma3 => self.gamma3,
            PatchEdge::Gamma4 => self.gamma4,
        }
    }
}

/// Node positions with normals, `H_S`, material region and boundary tags.
#[derive(Debug, Clone, Default)]
pub struct SurfaceCloud {
    pub positions: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub hs_values: Vec<f64>,
    pub region: Vec<Region>,
    pub boundary: Vec<BoundaryTag>,
    /// Patch edge membership, when the cloud was sampled on a strip.
    pub edge: Vec<Option<PatchEdge>>,
    /// Outward unit conormal, stored for boundary nodes only.
    pub conormals: Vec<Option<Vec3>>,
    /// `(GammaP1 index, GammaP2 index)`.
    pub periodic_pairs: Vec<(usize, usize)>,
    /// `(matrix-side index, inclusion-side index)` of coincident interface duplicates.
    pub interface_pairs: Vec<(usize, usize)>,
}

impl SurfaceCloud {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn push_interior(&mut self, position: Vec3, normal: Vec3, hs: f64) -> usize {
        self.push(position, normal, hs, Region::Matrix, BoundaryTag::Interior, None, None)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        position: Vec3,
        normal: Vec3,
        hs: f64,
        region: Region,
        boundary: BoundaryTag,
        edge: Option<PatchEdge>,
        conormal: Option<Vec3>,
    ) -> usize {
        self.positions.push(position);
        self.normals.push(normal);
        self.hs_values.push(hs);
        self.region.push(region);
        self.boundary.push(boundary);
        self.edge.push(edge);
        self.conormals.push(conormal);
        self.positions.len() - 1
    }

    pub fn indices_with(&self, tag: BoundaryTag) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.boundary[i] == tag).collect()
    }

    pub fn count(&self, tag: BoundaryTag) -> usize {
        self.boundary.iter().filter(|&&t| t == tag).count()
    }

    /// Matrix-side interface nodes without a partner (free rims of holes).
    pub fn is_hole_rim(&self, i: usize) -> bool {
        self.boundary[i] == BoundaryTag::Gamma0Matrix
            && !self.interface_pairs.iter().any(|&(a, _)| a == i)
    }

    /// Re-tags every edge node with the condition chosen for its edge.
    pub fn apply_edge_conditions(&mut self, conditions: &EdgeConditions) {
        for i in 0..self.len() {
            if let Some(edge) = self.edge[i] {
                self.boundary[i] = conditions.tag_for(edge);
            }
        }
    }

    /// Keeps the nodes for which `keep` is true, remapping stored pairs.
    pub fn retain(&mut self, keep: &[bool]) {
        assert_eq!(keep.len(), self.len());
        let mut map = vec![usize::MAX; self.len()];
        let mut next = 0;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                map[i] = next;
                next += 1;
            }
        }
        fn filter<T: Clone>(v: &[T], keep: &[bool]) -> Vec<T> {
            v.iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(x, _)| x.clone())
                .collect()
        }
        self.positions = filter(&self.positions, keep);
        self.normals = filter(&self.normals, keep);
        self.hs_values = filter(&self.hs_values, keep);
        self.region = filter(&self.region, keep);
        self.boundary = filter(&self.boundary, keep);
        self.edge = filter(&self.edge, keep);
        self.conormals = filter(&self.conormals, keep);
        let remap = |pairs: &[(usize, usize)]| -> Vec<(usize, usize)> {
            pairs
                .iter()
                .filter(|(a, b)| keep[*a] && keep[*b])
                .map(|&(a, b)| (map[a], map[b]))
                .collect()
        };
        self.periodic_pairs = remap(&self.periodic_pairs);
        self.interface_pairs = remap(&self.interface_pairs);
    }

    /// Checks the structural invariants of the cloud.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        let lens = [
            self.normals.len(),
            self.hs_values.len(),
            self.region.len(),
            self.boundary.len(),
            self.edge.len(),
            self.conormals.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(GfdmError::DimensionMismatch(format!(
                "cloud arrays have lengths {lens:?}, expected {n}"
            )));
        }
        for i in 0..n {
            let nn = self.normals[i].norm();
            if (nn - 1.0).abs() > 1e-12 {
                return Err(GfdmError::InvalidParameter(format!(
                    "normal of node {i} has length {nn}"
                )));
            }
            if let Some(c) = self.conormals[i] {
                if (c.norm() - 1.0).abs() > 1e-12 || c.dot(&self.normals[i]).abs() > 1e-10 {
                    return Err(GfdmError::InvalidParameter(format!(
                        "conormal of node {i} is not a unit tangent"
                    )));
                }
            }
        }
        for &(a, b) in &self.interface_pairs {
            if self.positions[a] != self.positions[b] {
                return Err(GfdmError::InvalidParameter(format!(
                    "interface pair ({a}, {b}) is not coincident"
                )));
            }
        }
        Ok(())
    }
}
