use std::f64::consts::PI;

use manifold_gfdm::geometry::*;
use manifold_gfdm::operators::*;
use manifold_gfdm::spatial::{brute_force_nearest, KdTree};
use manifold_gfdm::stencil::*;
use manifold_gfdm::Vec3;
use proptest::prelude::*;

fn nearest_node(cloud: &SurfaceCloud, x: &Vec3) -> usize {
    KdTree::new(&cloud.positions).nearest(x, 1, |_| true)[0]
}

#[test]
fn plane_laplacian_of_radial_quadratic() {
    let strip = StripSpec::with_curvature(0.0, 2.0, 1.0, 0.1);
    let cloud = sample_strip(&strip).unwrap();
    let stencils = build_all_stencils(&cloud, 20).unwrap();
    let u: Vec<f64> = cloud.positions.iter().map(|x| x[0] * x[0] + x[1] * x[1]).collect();
    let lap = apply_laplace_beltrami(&cloud, &stencils, &u);
    for v in lap {
        assert!((v - 4.0).abs() < 1e-6, "got {v}");
    }
}

#[test]
fn sphere_surface_gradient_of_coordinate() {
    let cloud = sample_sphere(2500).unwrap();
    let tree = KdTree::new(&cloud.positions);
    let i = nearest_node(&cloud, &Vec3::new(1.0, 0.0, 0.0));
    let st = build_stencil(&cloud, &tree, i, 40).unwrap();
    let u: Vec<f64> = cloud.positions.iter().map(|x| x[1]).collect();
    let grad = surface_gradient_rows(&st, &cloud.normals[i]).map(|r| r.apply(&u));
    let x = cloud.positions[i];
    // Exact tangential gradient of x2 at x is e2 - x2 x.
    let exact = Vec3::new(0.0, 1.0, 0.0) - x * x[1];
    assert!((Vec3::from(grad) - exact).norm() < 5e-3);
    assert!((x - Vec3::new(1.0, 0.0, 0.0)).norm() < 0.05);
    assert!((Vec3::from(grad) - Vec3::new(0.0, 1.0, 0.0)).norm() < 5e-2);
}

#[test]
fn flat_edge_conormal_derivative_of_linear_field() {
    let strip = StripSpec::with_curvature(0.0, 2.0, 0.5, 0.05);
    let cloud = sample_strip(&strip).unwrap();
    let stencils = build_all_stencils(&cloud, 30).unwrap();
    let u: Vec<f64> = cloud.positions.iter().map(|x| x[0]).collect();
    for st in &stencils {
        let i = st.center;
        if cloud.edge[i] == Some(PatchEdge::Gamma3) {
            let v = conormal_derivative_row(st, &cloud.conormals[i].unwrap()).apply(&u);
            assert!((v - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn arc_edge_conormal_derivative_of_arc_length() {
    let strip = StripSpec::with_curvature(1.0, PI, 1.5, 0.061);
    let cloud = sample_strip(&strip).unwrap();
    let stencils = build_all_stencils(&cloud, 40).unwrap();
    let u: Vec<f64> = cloud.positions.iter().map(|x| strip.arc_of(x)).collect();
    let mut checked = 0;
    for st in &stencils {
        let i = st.center;
        if cloud.edge[i] == Some(PatchEdge::Gamma3) {
            let v = conormal_derivative_row(st, &cloud.conormals[i].unwrap()).apply(&u);
            assert!((v - 1.0).abs() < 1e-3, "got {v}");
            checked += 1;
        }
    }
    assert!(checked > 10);
}

#[test]
fn laplace_beltrami_row_splits_into_projected_parts() {
    // Row = trace(P Hess P) - H n.grad, checked against the coefficient form.
    let cloud = sample_sphere(600).unwrap();
    let stencils = build_all_stencils(&cloud, 30).unwrap();
    for st in stencils.iter().step_by(50) {
        let n = cloud.normals[st.center];
        let h = cloud.hs_values[st.center];
        let row = laplace_beltrami_row(st, &n, h);
        let p = nalgebra::Matrix3::identity() - n * n.transpose();
        for (k, c) in row.coeffs.iter().enumerate() {
            let g = Vec3::new(st.first_order[0][k], st.first_order[1][k], st.first_order[2][k]);
            let s = &st.second_order;
            #[rustfmt::skip]
            let hess = nalgebra::Matrix3::new(
                s[0][k], s[3][k], s[4][k],
                s[3][k], s[1][k], s[5][k],
                s[4][k], s[5][k], s[2][k],
            );
            let expected = (p * hess * p).trace() - h * n.dot(&g);
            assert!((c - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
        }
    }
}

fn random_curved_offsets(seed: [f64; 6], m: usize) -> Vec<Vec3> {
    // Nodes on a tilted paraboloid patch with mild random spacing.
    let (a, b, c, tilt, h, phase) = (seed[0], seed[1], seed[2], seed[3], seed[4], seed[5]);
    (0..m)
        .map(|j| {
            let t = j as f64 * 2.399963 + phase;
            let r = h * ((j + 1) as f64 / m as f64).sqrt();
            let (x, y) = (r * t.cos(), r * t.sin());
            let z = a * x * x + b * x * y + c * y * y + tilt * (x * x * x - y * y * y);
            Vec3::new(x, y + 0.2 * z, z)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kd_tree_matches_brute_force(
        pts in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 20..120),
        q in prop::array::uniform3(-1.2f64..1.2),
        k in 1usize..20,
        parity in 0usize..2,
    ) {
        let points: Vec<Vec3> = pts.into_iter().map(Vec3::from).collect();
        let tree = KdTree::new(&points);
        let q = Vec3::from(q);
        let admit = |i: usize| i % 2 == parity || i % 3 == 0;
        prop_assert_eq!(tree.nearest(&q, k, admit), brute_force_nearest(&points, &q, k, admit));
    }

    #[test]
    fn quadratics_are_reproduced_on_curved_stencils(
        shape in prop::array::uniform6(0.0f64..1.0),
        coeffs in prop::array::uniform10(-1.0f64..1.0),
    ) {
        let h = 0.05 + 0.2 * shape[4];
        let seed = [shape[0] - 0.5, shape[1] - 0.5, shape[2] - 0.5, shape[3], h, 6.0 * shape[5]];
        let offsets = random_curved_offsets(seed, 30);
        let st = stencil_from_offsets(0, (1..=30).collect(), &offsets).unwrap();
        prop_assume!(st.is_full_rank());
        let c = coeffs;
        let f = |x: &Vec3| {
            c[0] + (c[1] * x[0] + c[2] * x[1] + c[3] * x[2]) / h
                + (c[4] * x[0] * x[0] + c[5] * x[1] * x[1] + c[6] * x[2] * x[2]
                    + c[7] * x[0] * x[1] + c[8] * x[0] * x[2] + c[9] * x[1] * x[2]) / (h * h)
        };
        let mut values = vec![f(&Vec3::zeros())];
        values.extend(offsets.iter().map(f));
        let d = st.apply(|i| values[i]);
        let exact = [
            c[1] / h, c[2] / h, c[3] / h,
            2.0 * c[4] / (h * h), 2.0 * c[5] / (h * h), 2.0 * c[6] / (h * h),
            c[7] / (h * h), c[8] / (h * h), c[9] / (h * h),
        ];
        for k in 0..9 {
            let scale = if k < 3 { 1.0 / h } else { 1.0 / (h * h) };
            prop_assert!((d[k] - exact[k]).abs() <= 1e-8 * scale, "derivative {} off: {} vs {}", k, d[k], exact[k]);
        }
    }

    #[test]
    fn surface_gradient_is_tangent_for_any_field(
        coeffs in prop::array::uniform6(-2.0f64..2.0),
        node in 0usize..400,
    ) {
        let cloud = sample_sphere(400).unwrap();
        let tree = KdTree::new(&cloud.positions);
        let st = build_stencil(&cloud, &tree, node, 20).unwrap();
        let u: Vec<f64> = cloud.positions.iter().map(|x| {
            coeffs[0] * x[0] + coeffs[1] * (x[1] * 3.0).sin() + coeffs[2] * x[2] * x[0]
                + coeffs[3] * x[1] * x[1] + coeffs[4] * (x[2]).exp() + coeffs[5]
        }).collect();
        let n = cloud.normals[node];
        let g = Vec3::from(surface_gradient_rows(&st, &n).map(|r| r.apply(&u)));
        prop_assert!(n.dot(&g).abs() <= 1e-10 * (1.0 + g.norm()));
    }

    #[test]
    fn operator_rows_annihilate_constants(node in 0usize..300, c in -5.0f64..5.0) {
        let cloud = sample_sphere(300).unwrap();
        let tree = KdTree::new(&cloud.positions);
        let st = build_stencil(&cloud, &tree, node, 25).unwrap();
        let u = vec![c; cloud.len()];
        let lb = laplace_beltrami_at(&cloud, &st).apply(&u);
        prop_assert!(lb.abs() < 1e-9 * (1.0 + c.abs()) * 1e3);
        let conormal = Vec3::new(0.0, 0.0, 1.0).cross(&cloud.normals[node]);
        if conormal.norm() > 1e-3 {
            let v = conormal_derivative_row(&st, &conormal.normalize()).apply(&u);
            prop_assert!(v.abs() < 1e-9 * (1.0 + c.abs()) * 1e2);
        }
    }
}

#[test]
fn spline_weight_profile() {
    assert_eq!(spline_weight(0.0, 1.0), 1.0);
    assert!((spline_weight(0.5, 1.0) - 0.3125).abs() < 1e-15);
    assert_eq!(spline_weight(1.0, 1.0), 0.0);
    assert_eq!(spline_weight(1.5, 1.0), 0.0);
    let mut last = 1.0;
    for k in 1..=100 {
        let w = spline_weight(k as f64 / 100.0, 1.0);
        assert!(w <= last && w >= 0.0);
        last = w;
    }
}
