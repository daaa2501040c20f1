use ksblow::profiles::{z0_mode, EULER_GAMMA};
use ksblow::specialfn::*;
use ksblow::QuadratureSpec;
use proptest::prelude::*;

/// −∫_y^∞ e^{−t}/t dt by Simpson in u = ln t.
fn ei_oracle(y: f64) -> f64 {
    let (a, b, n) = (y.ln(), (y.max(1.0) * 60.0).ln(), 40_000);
    let h = (b - a) / n as f64;
    let f = |u: f64| (-u.exp()).exp();
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    -s * h / 3.0
}

#[test]
fn ei_frozen_values() {
    assert!((expint_ei(-1.0).unwrap() - -0.219_383_934_395_52).abs() < 1e-13);
    for y in [0.01, 0.3, 2.0, 4.9, 5.1, 12.0, 40.0] {
        let v = expint_ei(-y).unwrap();
        assert!((v / ei_oracle(y) - 1.0).abs() < 1e-9, "{y}");
    }
    assert!(expint_ei(0.5).is_err());
}

#[test]
fn ei_small_argument() {
    for x in [1e-3, 1e-2] {
        assert!((expint_ei(-x).unwrap() - EULER_GAMMA - x.ln()).abs() <= 1.1 * x);
    }
}

#[test]
fn ei_derivative() {
    for x in [-0.1f64, -1.0, -3.0] {
        let h = 1e-5 * x.abs();
        let d = (expint_ei(x + h).unwrap() - expint_ei(x - h).unwrap()) / (2.0 * h);
        assert!((d / (x.exp() / x) - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn gaussian_integral_frozen() {
    let spec = QuadratureSpec::default().with_abs(1e-22).with_rel(1e-13);
    assert!((gaussian_z0_closed(10.0).unwrap() / 8.833_494_6e-4 - 1.0).abs() < 1e-7);
    assert!((gaussian_z0_integral(10.0, &spec).unwrap() / 8.887_763_8e-4 - 1.0).abs() < 1e-7);
}

#[test]
fn gaussian_remainder_order() {
    let spec = QuadratureSpec::default().with_abs(1e-22).with_rel(1e-13);
    let k: Vec<f64> = [10.0f64, 30.0, 100.0, 300.0]
        .iter()
        .map(|&a| (gaussian_z0_integral(a, &spec).unwrap() - gaussian_z0_closed(a).unwrap()).abs() * a.powi(6) / a.ln())
        .collect();
    let (lo, hi) = k.iter().fold((f64::MAX, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(hi / lo < 1.5, "{k:?}");
}

#[test]
fn cubic_moment_matches_simpson() {
    let n = 20_000;
    let h = 1.0 / n as f64;
    let f = |z: f64| z.powi(3) * z0_mode(z);
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let v = cubic_moment_z0(1.0).unwrap();
    assert!((v - s * h / 3.0).abs() < 1e-12);
    assert!((v - (6.0 - 8.0 * 2f64.ln())).abs() < 1e-12);
}

#[test]
fn heat6_at_origin() {
    assert!((heat6_factor(1e-9) - 1.0 / 32.0).abs() <= 1e-12);
}

proptest! {
    #[test]
    fn heat6_decreasing_positive(w in 1e-6f64..30.0, d in 1e-3f64..1.0) {
        let a = heat6_factor(w);
        prop_assert!(a > 0.0 && a <= 1.0 / 32.0);
        prop_assert!(heat6_factor(w + d) <= a);
    }

    #[test]
    fn ei_negative_and_increasing(y in 1e-4f64..50.0) {
        let v = expint_ei(-y).unwrap();
        prop_assert!(v < 0.0);
        prop_assert!(expint_ei(-y * 1.1).unwrap() > v);
    }
}
