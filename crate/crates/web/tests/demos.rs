use manifold_gfdm_web::{spectrum, sphere, strip};

#[test]
fn sphere_demo_returns_a_field_per_node() {
    let demo = sphere(400, 1000.0).unwrap();
    let pos = demo.positions();
    let vals = demo.values();
    assert_eq!(pos.len(), 3 * 400);
    assert_eq!(vals.len(), 400);
    for p in pos.chunks(3) {
        assert!((p[0].hypot(p[1]).hypot(p[2]) - 1.0).abs() < 1e-12);
    }
    assert!(demo.global_error() < 1e-2);
}

#[test]
fn sphere_demo_rejects_oversized_requests() {
    assert!(sphere(50, 1000.0).is_err());
    assert!(sphere(100_000, 1000.0).is_err());
}

#[test]
fn strip_demo_marks_inclusions_and_reports_transmission() {
    let demo = strip(0.4, std::f64::consts::PI / 16.0, 0.5, 0.1).unwrap();
    let n = demo.amplitude().len();
    assert_eq!(demo.coords().len(), 2 * n);
    assert_eq!(demo.inclusion().len(), n);
    assert!(demo.inclusion().iter().any(|&g| g == 1));
    assert!(demo.coords().chunks(2).all(|c| c[0].abs() <= 8.0 + 1e-9 && c[1].abs() <= 0.5 + 1e-12));
    assert!(demo.transmission_db() < -10.0);
}

#[test]
fn spectrum_demo_pairs_frequency_and_transmission() {
    let s = spectrum(0.4, 0.0, 0.2, 0.8, 3, 0.1).unwrap();
    assert_eq!(s.len(), 6);
    assert_eq!(s[0], 0.2);
    assert_eq!(s[4], 0.8);
    assert!(s.chunks(2).all(|p| p[1].is_finite()));
}

#[test]
fn strip_parameters_are_validated() {
    assert!(strip(0.4, 0.2, 0.5, 0.01).is_err());
    assert!(strip(0.9, 0.2, 0.5, 0.1).is_err());
    assert!(strip(0.4, 1.0, 0.5, 0.1).is_err());
    assert!(spectrum(0.4, 0.2, 0.2, 0.8, 0, 0.1).is_err());
}
