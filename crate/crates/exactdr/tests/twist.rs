use proptest::prelude::*;

use exactdr::twist::{minimal_power, twist_map, TwistMap};

/// `(x + iy)^k` by repeated multiplication.
fn cpow(x: f64, y: f64, k: u32) -> (f64, f64) {
    let mut p = (1.0, 0.0);
    for _ in 0..k {
        p = (p.0 * x - p.1 * y, p.0 * y + p.1 * x);
    }
    p
}

/// `w^{N+1} / (c |w|^N)` with `w = z + a`, minus the image of `a`.
fn oracle(n: u32, big_r: f64, x: f64, y: f64) -> (f64, f64) {
    let a = 2.0 * big_r;
    let c = ((n + 1) as f64).sqrt();
    let f = |x: f64, y: f64| {
        let (u, v) = cpow(x, y, n + 1);
        let s = c * x.hypot(y).powi(n as i32);
        (u / s, v / s)
    };
    let (u, v) = f(x + a, y);
    let (u0, v0) = f(a, 0.0);
    (u - u0, v - v0)
}

#[test]
fn minimal_power_examples() {
    // 5R/r = 5 needs N + 1 >= 25
    assert_eq!(minimal_power(1.0, 1.0), 24);
    assert_eq!(minimal_power(1.0, 0.5), 99);
    assert_eq!(minimal_power(1.0, 10.0), 1);
}

#[test]
fn reports_pass_for_several_radii() {
    for (big_r, r) in [(1.0, 0.5), (2.0, 1.0), (0.5, 2.0), (3.0, 0.75)] {
        let rep = twist_map(None, big_r, r, 60);
        assert!(rep.ok, "{big_r} {r}: {rep:?}");
        assert!(rep.origin_fixed);
        assert!(rep.max_image_radius <= rep.radius_bound);
        assert!(rep.max_det_deviation <= 1e-9);
        let c = rep.derived_constant;
        assert!((c * c - (rep.map.n + 1) as f64).abs() < 1e-12);
    }
}

#[test]
fn too_small_power_is_reported() {
    let rep = twist_map(Some(3), 2.0, 1.0, 40);
    assert!(!rep.ok);
    assert!(rep.max_image_radius > 1.0);
    // area is still preserved
    assert!(rep.max_det_deviation <= 1e-9);
}

#[test]
fn displayed_constant_scales_area() {
    for n in [2u32, 5, 24] {
        let mut m = TwistMap::new(n, 1.0);
        m.c = n as f64;
        let want = (n + 1) as f64 / (n * n) as f64;
        for (x, y) in [(0.0, 0.0), (0.3, -0.4), (-0.9, 0.1)] {
            assert!((m.jacobian_det(x, y) - want).abs() < 1e-8, "N = {n}");
        }
        let rep = twist_map(Some(n), 1.0, 100.0, 4);
        assert!((rep.displayed_constant_det - want).abs() < 1e-15);
    }
}

proptest! {
    #[test]
    fn minimal_power_is_minimal(big_r in 0.01f64..10.0, r in 0.01f64..10.0) {
        let n = minimal_power(big_r, r);
        prop_assert!(5.0 * big_r / ((n + 1) as f64).sqrt() <= r);
        if n > 1 {
            prop_assert!(5.0 * big_r / (n as f64).sqrt() > r);
        }
    }

    #[test]
    fn map_matches_complex_power(n in 1u32..12, big_r in 0.1f64..3.0, s in 0.0f64..1.0, th in 0.0f64..6.3) {
        let (x, y) = (big_r * s * th.cos(), big_r * s * th.sin());
        let m = TwistMap::new(n, big_r);
        let (u, v) = m.apply(x, y);
        let (uo, vo) = oracle(n, big_r, x, y);
        let scale = m.radius_bound();
        prop_assert!((u - uo).abs() <= 1e-12 * scale && (v - vo).abs() <= 1e-12 * scale);
        prop_assert!(u.hypot(v) <= scale * (1.0 + 1e-12));
    }

    #[test]
    fn determinant_is_one(n in 1u32..40, big_r in 0.1f64..5.0, s in 0.0f64..1.0, th in 0.0f64..6.3) {
        let m = TwistMap::new(n, big_r);
        let det = m.jacobian_det(big_r * s * th.cos(), big_r * s * th.sin());
        prop_assert!((det - 1.0).abs() <= 1e-9, "det {det}");
    }
}
