use ksblow::profiles::*;
use ksblow::specialfn::beta_const;
use ksblow::QuadratureSpec;
use proptest::prelude::*;

/// Composite Simpson on [a, b] with n (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn bubble_mass_is_8pi() {
    // ∫U r dr on [0, R] = 4R²/(1+R²), tail handled in closed form
    let r = 200.0;
    let q = simpson(|s| bubble_u(s) * s, 0.0, r, 200_000);
    let tail = 4.0 - 4.0 * r * r / (1.0 + r * r);
    assert!((2.0 * std::f64::consts::PI * (q + tail) - 8.0 * std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn rate_constants() {
    let c = consts();
    assert!(c.identity_defect().abs() <= 1e-14);
    assert!((c.kappa - 0.19092).abs() < 5e-6);
    assert!((c.a - 0.5f64.sqrt()).abs() < 1e-16);
    assert!((c.c_star - 0.304_0).abs() < 1e-3);
}

#[test]
fn liouville_residual_is_second_order() {
    // Γ₀'' + Γ₀'/ρ + U = 0 by centered differences
    let res = |h: f64| {
        (1..200)
            .map(|i| {
                let r = 0.05 * i as f64;
                let d2 = (gamma0(r + h) - 2.0 * gamma0(r) + gamma0(r - h)) / (h * h);
                let d1 = (gamma0(r + h) - gamma0(r - h)) / (2.0 * h);
                (d2 + d1 / r + bubble_u(r)).abs()
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (res(1e-2), res(5e-3));
    let order = (e1 / e2).log2();
    assert!(order > 1.8, "order {order}");
}

#[test]
fn lambda_star_matches_integral_of_p_star() {
    // leading order only: the relative gap scales like 1/√(2|ln x|)
    for &x in &[1e-3, 1e-5, 1e-8, 1e-20, 1e-60] {
        let l2 = lambda_star_gap(x).powi(2);
        let from_p = -2.0 * p_star_integral_gap(x);
        let scaled = (1.0 - from_p / l2) * (2.0 * x.ln().abs()).sqrt();
        assert!(scaled > 0.5 && scaled < 1.0, "x {x}: {scaled}");
    }
}

#[test]
fn cutoff_tail_integral_in_range() {
    let b = beta_const(Cutoff::Quintic, &QuadratureSpec::default()).unwrap();
    assert!(b > 0.125 && b < 0.625);
    let sharp = beta_const(Cutoff::Sharp, &QuadratureSpec::default()).unwrap();
    assert!((sharp - 0.5).abs() < 1e-10);
}

#[test]
fn checked_rate_rejects_bad_gap() {
    assert!(p_star(1.0, 0.5).is_err());
    assert!(lambda_star(-2.0, 0.5).is_err());
    assert!(p_star(0.4, 0.5).unwrap() < 0.0);
}

proptest! {
    #[test]
    fn z0_identity_pointwise(r in 0.0f64..50.0) {
        let d = 2.0 * bubble_u(r) + r * bubble_u_prime(r) - (16.0 - 16.0 * r * r) / (1.0 + r * r).powi(3);
        prop_assert!(d.abs() <= 1e-12);
    }

    #[test]
    fn cutoff_bounded_and_flat_outside(s in -1.0f64..4.0) {
        let c = Cutoff::Quintic;
        prop_assert!((0.0..=1.0).contains(&c.value(s)));
        if !(1.0..=2.0).contains(&s) {
            prop_assert_eq!(c.d1(s), 0.0);
        }
        prop_assert!(c.d1(s) <= 0.0);
    }

    #[test]
    fn p_star_negative_and_shrinking(x in 1e-12f64..0.5) {
        let p = p_star_gap(x);
        prop_assert!(p < 0.0);
        prop_assert!(p_star_gap(x * 0.5) > p);
    }

    #[test]
    fn eta_is_monotone(s in -1.0f64..0.5, d in 0.0f64..0.3) {
        prop_assert!(eta(s + d) >= eta(s));
    }
}
