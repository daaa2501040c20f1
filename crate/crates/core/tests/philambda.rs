use std::f64::consts::PI;
use std::sync::Arc;

use ksblow::philambda::*;
use ksblow::profiles::Cutoff;
use ksblow::rate::final_integral;
use ksblow::{QuadratureSpec, RadialGrid};
use proptest::prelude::*;

fn window() -> TimeWindow {
    TimeWindow::default_window()
}

#[test]
fn source_shape() {
    let w = window();
    let star = RateFunction::star(w);
    for &t in &[0.0, 5e-5, 9.99e-5] {
        let l2 = star.lambda2(t);
        let e0 = eval_e(0.0, t, &star, &w, Cutoff::Quintic).unwrap();
        assert!((e0 / (16.0 * star.p(t) / (l2 * l2)) - 1.0).abs() < 1e-12);
        let edge = 2.0 * (w.delta * w.gap(t)).sqrt();
        assert_eq!(eval_e(1.0001 * edge, t, &star, &w, Cutoff::Quintic).unwrap(), 0.0);
        assert_eq!(eval_e_phi1(1.0001 * edge, t, &star, &w, Cutoff::Quintic).unwrap(), 0.0);
    }
    let zero = RateFunction::zero(w);
    assert_eq!(eval_e(0.0, 5e-5, &zero, &w, Cutoff::Quintic).unwrap(), 0.0);
}

#[test]
fn heat_step_basics() {
    let grid = Arc::new(RadialGrid::geometric(1e-3, 2.0, 300).unwrap());
    let heat = SixDimHeat::new(grid.clone()).unwrap();
    let n = grid.len();
    assert!(heat.implicit_step(&vec![0.0; n], &vec![0.0; n], 1e-3).unwrap().iter().all(|&v| v == 0.0));
    let s = heat.implicit_step(&vec![0.0; n], &vec![3.0; n], 1e-7).unwrap();
    assert!((s[0] - 3e-7).abs() < 1e-12);
    // a 6-D Gaussian spreads: peak drops, stays positive
    let phi: Vec<f64> = grid.radii().iter().map(|r| (-r * r / 0.01).exp()).collect();
    let next = heat.implicit_step(&phi, &vec![0.0; n], 1e-4).unwrap();
    assert!(next[0] < phi[0] && next.iter().all(|&v| v >= 0.0));
    let off_axis = RadialGrid::from_radii((1..60).map(|i| i as f64 * 0.01).collect()).unwrap();
    assert!(SixDimHeat::new(Arc::new(off_axis)).is_err());
}

#[test]
fn duhamel_trivial_cases() {
    let w = window();
    let spec = QuadratureSpec::default();
    assert_eq!(mass_phi1_duhamel(&RateFunction::zero(w), &w, 5e-5, &spec).unwrap(), 0.0);
    assert_eq!(mass_phi1_duhamel(&RateFunction::star(w), &w, -w.eps_t, &spec).unwrap(), 0.0);
    assert_eq!(expansion_rhs(&RateFunction::zero(w), &w, 5e-5, &spec).unwrap(), 0.0);
}

#[test]
fn expansion_rhs_limit() {
    let w = window();
    let star = RateFunction::star(w);
    let spec = QuadratureSpec::default().with_rel(1e-9);
    let full = 4.0 * PI * final_integral(&star);
    let near = expansion_rhs(&star, &w, w.t_final - 1e-15, &spec).unwrap();
    let far = expansion_rhs(&star, &w, w.t_final - 1e-6, &spec).unwrap();
    assert!((near - full).abs() < (far - full).abs());
}

#[test]
fn duhamel_matches_stepper() {
    let w = window();
    let star = RateFunction::star(w);
    let spec = QuadratureSpec::default().with_rel(1e-9);
    let ts = [w.t_final - 1e-5, w.t_final - 3e-6, w.t_final - 1e-6];
    let stepped = run_phi_lambda(&star, &w, &ts, &PhiRunConfig::default()).unwrap();
    for (c, &t) in stepped.iter().zip(&ts) {
        let d = mass_phi1_duhamel(&star, &w, t, &spec).unwrap();
        assert!((c.mass / d - 1.0).abs() < 0.02);
    }
}

#[test]
fn sup_bound_single_constant() {
    let w = window();
    let star = RateFunction::star(w);
    let ts = [w.t_final - 4e-6, w.t_final - 2e-6, w.t_final - 1e-6];
    for source in [Source::Phi1, Source::Full] {
        let c = run_phi_lambda(&star, &w, &ts, &PhiRunConfig { source, ..PhiRunConfig::default() }).unwrap();
        let (lo, hi) = c.iter().fold((f64::MAX, 0.0f64), |(l, h), v| (l.min(v.bound_ratio), h.max(v.bound_ratio)));
        assert!(hi / lo < 1.2, "{source:?}: {lo} {hi}");
    }
}

#[test]
fn checkpoints_validated() {
    let w = window();
    let star = RateFunction::star(w);
    assert!(run_phi_lambda(&star, &w, &[5e-5, 4e-5], &PhiRunConfig::default()).is_err());
    assert!(run_phi_lambda(&star, &w, &[2e-4], &PhiRunConfig::default()).is_err());
}

#[test]
fn mass_formula_values() {
    assert!((mass_at_t_formula(1e-6).unwrap() - 1.851e-2).abs() < 1e-5);
    // V = √(2|ln ε|) = 3.0349 at ε = 1e-2
    let v: f64 = (2.0 * 100f64.ln()).sqrt();
    let oracle = 2.0 * 2f64.sqrt() * PI * (-(0.577_215_664_901_532_9 + 2.0f64)).exp() * v * (-v).exp();
    assert!((mass_at_t_formula(1e-2).unwrap() - oracle).abs() < 1e-14);
    assert!((mass_at_t_formula(1e-2).unwrap() - 0.098_524).abs() < 1e-5);
    assert!(mass_at_t_formula(1.5).is_err());
}

proptest! {
    #[test]
    fn mass_formula_decreasing(l in 0.6f64..600.0, d in 0.01f64..5.0) {
        // past the turning point V = 1 of V e^{−V}
        let a = mass_at_t_formula((-l).exp()).unwrap();
        let b = mass_at_t_formula((-(l + d)).exp()).unwrap();
        prop_assert!(b < a);
    }
}
