//! Surfaces, node clouds and their boundary/interface structure.

pub mod carve;
pub mod cloud;
pub mod sampling;
pub mod surface;

pub use carve::{carve_and_classify, hole_lattice_5x5, inclusion_radius, pair_periodic, Disc, DiscMode};
pub use cloud::{BoundaryTag, EdgeConditions, PatchEdge, Region, SurfaceCloud};
pub use sampling::{
    fibonacci_sphere, sample_cylinder_patch, sample_implicit, sample_sphere, sample_sphere_with,
    sample_strip, ImplicitSampling, SphereSampling, StripShape, StripSpec,
};
pub use surface::{
    mean_curvature_fd, mean_curvature_term, normal_at, ConstantDistanceProduct, Cylinder,
    ImplicitSurface, Plane, RotationAboutX2, Sphere,
};
