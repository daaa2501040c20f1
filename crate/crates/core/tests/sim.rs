use std::f64::consts::PI;

use ksblow::sim::*;
use proptest::prelude::*;

fn cfg(m: f64) -> SimConfig {
    SimConfig { mass_multiplier: m, muscl: true, ..SimConfig::default() }
}

#[test]
fn config_violations_collected() {
    let bad = SimConfig { mass_multiplier: -1.0, cells: 10, cfl: 2.0, ..SimConfig::default() };
    assert_eq!(bad.violations().len(), 3);
    assert!(init_bubble(&bad).is_err());
}

#[test]
fn initial_mass_exact() {
    for m in [0.5, 1.0, 1.05, 2.0] {
        let (mesh, st) = init_bubble(&cfg(m)).unwrap();
        assert!((mesh.mass(&st.u) / (8.0 * PI * m) - 1.0).abs() < 1e-13);
        assert!(st.u.iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn zero_density_has_zero_gradient() {
    let (mesh, _) = init_bubble(&cfg(1.0)).unwrap();
    assert!(chemical_gradient_faces(&mesh, &vec![0.0; mesh.cells()]).iter().all(|&v| v == 0.0));
}

#[test]
fn bubble_drift_second_order() {
    let drift = |cells: usize| {
        let c = SimConfig { cells, max_t: 0.5, ..cfg(1.0) };
        let (mesh, _) = init_bubble(&c).unwrap();
        let st = bubble_state(&mesh);
        let u0 = st.u.clone();
        let r = run_from(&c, mesh, st).unwrap();
        r.final_state.u.iter().zip(&u0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let (a, b) = (drift(256), drift(512));
    assert!((a / b).log2() > 1.8, "{a} {b}");
}

#[test]
fn second_moment_identity_subcritical() {
    let run = run(&SimConfig { max_t: 0.5, ..cfg(0.5) }).unwrap();
    let rep = verify_m2_identity(&run.samples).unwrap();
    assert!(rep.rel_discrepancy < 0.02);
    let w = resolved_window(&run.samples);
    assert!(w.iter().all(|s| (s.mass / w[0].mass - 1.0).abs() <= 1e-6));
}

#[test]
fn supercritical_blows_up_within_bound() {
    let c = SimConfig { max_t: 10.0, ..cfg(1.5) };
    let run = run(&c).unwrap();
    let m = c.mass();
    let bound = run.samples[0].m2 / (m * m / (2.0 * PI) - 4.0 * m);
    assert_eq!(run.status, RunStatus::BlowUp);
    assert!(run.final_state.t < bound);
}

#[test]
fn rate_extraction_synthetic() {
    let mk = |l2: &dyn Fn(f64) -> f64| -> Vec<Sample> {
        (0..80)
            .map(|i| {
                let t = 1.0 - 10f64.powf(-(i as f64) / 20.0);
                let lam = l2(1.0 - t).sqrt();
                Sample { t, mass: 1.0, m2: 0.0, u_peak: 8.0 / (lam * lam), lambda_eff: lam, boundary_ratio: 0.0 }
            })
            .collect()
    };
    let type_one = extract_rate(&mk(&|x| 0.3 * x)).unwrap();
    assert!(type_one.q_trend.abs() < 1e-6);
    assert!((type_one.t_est - 1.0).abs() < 1e-6);
    let type_two = extract_rate(&mk(&|x| x * (-(2.0 * x.ln().abs()).sqrt()).exp())).unwrap();
    assert!(type_two.q.windows(2).all(|w| w[1] < w[0]));
    assert!(extract_rate(&mk(&|x| 0.3 * x)[..10]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn positivity_and_mass(m in 0.3f64..1.6, lambda0 in 0.7f64..1.5) {
        let c = SimConfig { mass_multiplier: m, lambda0, cells: 256, max_t: 0.05, ..SimConfig::default() };
        let (mesh, mut st) = init_bubble(&c).unwrap();
        let stepper = Stepper::new(mesh, &c);
        let m0 = st.mass;
        for _ in 0..40 {
            let dt = (c.cfl * stepper.cfl_dt(&st.u)).min(c.peak_dt / st.u_peak).min(1e-3);
            st = stepper.step(&st, dt).unwrap();
            prop_assert!(st.u.iter().all(|&v| v >= 0.0));
        }
        prop_assert!((st.mass / m0 - 1.0).abs() <= 1e-10);
    }
}
