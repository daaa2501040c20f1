//! Named numeric checks for `specialfn-check` and `selftest`.

use std::f64::consts::PI;

use ksblow::philambda::{eval_e, expansion_rhs, mass_at_t_formula, mass_phi1_duhamel, SixDimHeat};
use ksblow::profiles::{bubble_u, consts, z0_mode, Cutoff, EULER_GAMMA};
use ksblow::quad::integrate;
use ksblow::rate::{a_sigma_gap, b1_gap, nonlocal_residual, operator_spec, PicardConfig, Resolvent};
use ksblow::ratefn::{RateFunction, SampledFn, TimeWindow};
use ksblow::sim::{self, SimConfig};
use ksblow::specialfn::{cubic_moment_z0, expint_ei, gaussian_z0_closed, gaussian_z0_integral, heat6_factor};
use ksblow::{QuadratureSpec, RadialGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, reference, tolerance }
    }

    fn flag(name: &str, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }

    pub fn abs_error(&self) -> f64 {
        (self.value - self.reference).abs()
    }

    pub fn pass(&self) -> bool {
        self.value.is_finite() && self.abs_error() <= self.tolerance
    }
}

type R<T> = ksblow::Result<T>;

/// Special-function and closed-form checks.
pub fn specialfn_checks() -> R<Vec<Check>> {
    let spec = QuadratureSpec::default().with_abs(1e-22).with_rel(1e-13);
    let mut out = Vec::new();
    out.push(Check::new("ei_minus_one", expint_ei(-1.0)?, -0.219_383_934_395_520_3, 1e-13));
    for x in [1e-3, 1e-2] {
        let d = expint_ei(-x)? - EULER_GAMMA - x.ln();
        out.push(Check::new(format!("ei_small_expansion_{x:e}"), d, 0.0, 1.1 * x));
    }
    out.push(Check::new("heat6_factor_at_zero", heat6_factor(1e-9), 1.0 / 32.0, 1e-12));
    let direct = integrate(|z: f64| z.powi(3) * z0_mode(z), 0.0, 1.0, &spec)?.value;
    out.push(Check::new("cubic_moment_z0_vs_quadrature", cubic_moment_z0(1.0)?, direct, 1e-10));
    out.push(Check::new("cubic_moment_z0_closed", cubic_moment_z0(1.0)?, 6.0 - 8.0 * 2f64.ln(), 1e-12));
    for a in [10.0, 30.0, 100.0, 300.0] {
        let q = gaussian_z0_integral(a, &spec)?;
        let c = gaussian_z0_closed(a)?;
        out.push(Check::new(format!("gaussian_z0_a{a}"), q, c, 10.0 * f64::ln(a) / a.powi(6)));
    }
    out.push(Check::new("kappa", consts().kappa, 0.19092, 5e-6));
    out.push(Check::new("mass_at_t_eps_1e-6", mass_at_t_formula(1e-6)?, 1.851e-2, 1e-5));
    out.push(Check::new("mass_at_t_eps_1e-2", mass_at_t_formula(1e-2)?, 0.098_524, 1e-5));
    Ok(out)
}

/// Closed-form and structural checks plus a seeded resolvent battery.
pub fn selftest_checks(seed: u64) -> R<Vec<Check>> {
    let mut out = specialfn_checks()?;
    let w = TimeWindow::default_window();
    let star = RateFunction::star(w);
    let zero = RateFunction::zero(w);
    let spec = operator_spec();
    out.push(Check::new("bubble_at_origin", bubble_u(0.0), 8.0, 0.0));
    out.push(Check::new("z0_at_origin", z0_mode(0.0), 16.0, 0.0));
    out.push(Check::new("rate_constant_identity", consts().identity_defect(), 0.0, 1e-14));

    let t = 5e-5;
    let l2 = star.lambda2(t);
    let e0 = eval_e(0.0, t, &star, &w, Cutoff::Quintic)?;
    out.push(Check::new("source_at_origin", e0 / (16.0 * star.p(t) / (l2 * l2)), 1.0, 1e-12));
    let far = 3.0 * (w.delta * w.gap(t)).sqrt();
    out.push(Check::new("source_beyond_cutoff", eval_e(far, t, &star, &w, Cutoff::Quintic)?, 0.0, 0.0));

    let grid = std::sync::Arc::new(RadialGrid::geometric(1e-3, 1.0, 200)?);
    let heat = SixDimHeat::new(grid.clone())?;
    let zeros = vec![0.0; grid.len()];
    let s0 = heat.implicit_step(&zeros, &zeros, 1e-3)?;
    out.push(Check::new("heat6_zero_stays_zero", s0.iter().fold(0.0f64, |m, v| m.max(v.abs())), 0.0, 0.0));
    let c = vec![2.0; grid.len()];
    let s1 = heat.implicit_step(&zeros, &c, 1e-6)?;
    out.push(Check::new("heat6_constant_forcing", s1[0], 2e-6, 1e-11));

    out.push(Check::new("expansion_rhs_zero_rate", expansion_rhs(&zero, &w, t, &QuadratureSpec::default())?, 0.0, 0.0));
    out.push(Check::new("duhamel_zero_rate", mass_phi1_duhamel(&zero, &w, t, &QuadratureSpec::default())?, 0.0, 0.0));
    out.push(Check::new("duhamel_at_start", mass_phi1_duhamel(&star, &w, -w.eps_t, &QuadratureSpec::default())?, 0.0, 0.0));
    out.push(Check::new("residual_zero_rate", nonlocal_residual(&zero, t, &spec)?, 0.0, 0.0));

    let ell = ksblow::rate::rate_nodes(&w, 200);
    let konst = RateFunction::sampled(w, SampledFn::from_fn(&ell, |_| 3e-4)?, false);
    out.push(Check::new("a_sigma_constant", a_sigma_gap(&konst, 1e-6, 0.45, &spec)?, 0.0, 1e-15));
    let zs = RateFunction::sampled(w, SampledFn::from_fn(&ell, |_| 0.0)?, false);
    out.push(Check::new("b1_zero", b1_gap(&zs, 1e-6, &spec)?, 0.0, 0.0));
    let r0 = Resolvent::new(|_| 0.0, 1.0, w, &[])?;
    out.push(Check::new("resolvent_zero", r0.eval_ell(12.0), 0.0, 0.0));

    out.push(Check::flag("window_rejects_T_above_epsT", TimeWindow::new(1e-2, 1e-4, 0.1).is_err()));
    out.push(Check::flag("sigma_rejects_0.6", PicardConfig { sigma: 0.6, ..PicardConfig::default() }.validate().is_err()));

    for m in [1.0, 1.05] {
        let cfg = SimConfig { mass_multiplier: m, ..SimConfig::default() };
        let (mesh, st) = sim::init_bubble(&cfg)?;
        out.push(Check::new(format!("init_mass_{m}"), mesh.mass(&st.u), 8.0 * PI * m, 1e-12 * 8.0 * PI * m));
    }
    let cfg = SimConfig::default();
    let (mesh, _) = sim::init_bubble(&cfg)?;
    let g = sim::chemical_gradient_faces(&mesh, &vec![0.0; mesh.cells()]);
    out.push(Check::new("chemical_gradient_zero", g.iter().fold(0.0f64, |m, v| m.max(v.abs())), 0.0, 0.0));

    // type-I profile gives constant q
    let samples: Vec<sim::Sample> = (0..60)
        .map(|i| {
            let tt = 1.0 - 10f64.powf(-(i as f64) / 20.0);
            let u = 5.0 / (1.0 - tt);
            sim::Sample { t: tt, mass: 1.0, m2: 0.0, u_peak: u, lambda_eff: (8.0 / u).sqrt(), boundary_ratio: 0.0 }
        })
        .collect();
    let rep = sim::extract_rate(&samples)?;
    out.push(Check::new("type_one_q_trend", rep.q_trend, 0.0, 1e-6));

    // seeded resolvent battery
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..3 {
        let m: f64 = rng.gen_range(0.0..0.45);
        let amp: f64 = rng.gen_range(0.0..0.5);
        let freq: f64 = rng.gen_range(0.1..2.0);
        let a = consts().a;
        let f = move |l: f64| (-2.0 * a * l.sqrt()).exp() * l.powf(-m) * (1.0 + amp * (freq * l).sin());
        let r = Resolvent::new(f, 1.0, w, &[])?;
        let worst = [6.0, 12.0, 20.0].iter().map(|&l| r.ode_relative_residual(l, &QuadratureSpec::default())).collect::<R<Vec<_>>>()?;
        out.push(Check::new(format!("resolvent_ode_random_{k}"), worst.into_iter().fold(0.0, f64::max), 0.0, 1e-6));
    }
    Ok(out)
}
