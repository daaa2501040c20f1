//! One function per subcommand. Each writes its artifacts into the output directory.

use std::path::Path;

use ksblow::philambda::{expansion_phi1, expansion_rhs, mass_phi1_duhamel, run_phi_lambda};
use ksblow::rate::{operator_spec, solve_rate};
use ksblow::ratefn::RateFunction;
use ksblow::sim::{self, RunStatus, Sample};
use ksblow::QuadratureSpec;
use serde::Serialize;

use crate::checks::{selftest_checks, specialfn_checks, Check};
use crate::config::{Command, ExperimentConfig};
use crate::error::CliError;
use crate::output::{write_checks, write_csv, write_json, Table};

/// Outcome of a successful command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    BlowUp,
}

macro_rules! note {
    ($v:expr, $($arg:tt)*) => {
        if $v {
            eprintln!($($arg)*);
        }
    };
}

pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, verbose: bool) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(out)?;
    match cfg.command {
        Command::Sim => run_sim(cfg, out, verbose),
        Command::Rate => run_rate(cfg, out, verbose),
        Command::MassPhi => run_mass_phi(cfg, out, verbose),
        Command::SpecialfnCheck => {
            let checks = specialfn_checks()?;
            finish_checks(cfg, out, "specialfn.csv", &checks, verbose)
        }
        Command::Selftest => {
            let checks = selftest_checks(cfg.seed)?;
            finish_checks(cfg, out, "selftest.csv", &checks, verbose)
        }
    }
}

fn finish_checks(cfg: &ExperimentConfig, out: &Path, name: &str, checks: &[Check], verbose: bool) -> Result<Outcome, CliError> {
    write_checks(&out.join(name), cfg, checks)?;
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass()).collect();
    for c in checks {
        note!(verbose, "{:<40} {}", c.name, if c.pass() { "ok" } else { "FAIL" });
    }
    if failed.is_empty() {
        Ok(Outcome::Done)
    } else {
        Err(CliError::Selftest(failed.len()))
    }
}

/// Local least-squares slope of m₂ over up to 7 neighboring samples.
fn local_slope(s: &[Sample], i: usize) -> f64 {
    let lo = i.saturating_sub(3);
    let hi = (i + 4).min(s.len());
    let w = &s[lo..hi];
    let n = w.len() as f64;
    let tm = w.iter().map(|v| v.t).sum::<f64>() / n;
    let ym = w.iter().map(|v| v.m2).sum::<f64>() / n;
    let sxx: f64 = w.iter().map(|v| (v.t - tm).powi(2)).sum();
    let sxy: f64 = w.iter().map(|v| (v.t - tm) * (v.m2 - ym)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

#[derive(Serialize)]
struct RateSummary {
    t_est: f64,
    exponent: f64,
    q_trend: f64,
    q_first: f64,
    q_last: f64,
}

#[derive(Serialize)]
struct SimSummary {
    status: RunStatus,
    steps: usize,
    t_end: f64,
    innermost_cell: f64,
    relative_mass_drift: f64,
    m2_identity: Option<sim::M2Report>,
    rate: Option<RateSummary>,
}

fn run_sim(cfg: &ExperimentConfig, out: &Path, verbose: bool) -> Result<Outcome, CliError> {
    note!(verbose, "sim: mass multiplier {}, {} cells", cfg.sim.mass_multiplier, cfg.sim.cells);
    let series = sim::run(&cfg.sim)?;
    let s = &series.samples;
    let rate = if series.status == RunStatus::BlowUp { sim::extract_rate(s).ok() } else { None };
    let mut table = Table::new(&["t", "M", "m2", "dm2dt_fit", "u_peak", "lambda_eff", "q_indicator"]);
    for (i, x) in s.iter().enumerate() {
        let q = rate.as_ref().and_then(|r| (x.t < r.t_est).then(|| x.lambda_eff * x.lambda_eff / (r.t_est - x.t)));
        table.push_opt(vec![Some(x.t), Some(x.mass), Some(x.m2), Some(local_slope(s, i)), Some(x.u_peak), Some(x.lambda_eff), q])?;
    }
    write_csv(&out.join("diagnostics.csv"), cfg, &table)?;
    let summary = SimSummary {
        status: series.status,
        steps: series.steps,
        t_end: series.final_state.t,
        innermost_cell: series.innermost_cell,
        relative_mass_drift: s.last().map(|l| l.mass / s[0].mass - 1.0).unwrap_or(0.0),
        m2_identity: sim::verify_m2_identity(s).ok(),
        rate: rate.map(|r| RateSummary {
            t_est: r.t_est,
            exponent: r.exponent,
            q_trend: r.q_trend,
            q_first: r.q[0],
            q_last: r.q[r.q.len() - 1],
        }),
    };
    write_json(&out.join("summary.json"), &summary)?;
    note!(verbose, "sim: {:?} after {} steps at t = {}", series.status, series.steps, summary.t_end);
    Ok(match series.status {
        RunStatus::BlowUp => Outcome::BlowUp,
        RunStatus::MaxTime => Outcome::Done,
    })
}

#[derive(Serialize)]
struct NormEntry {
    gamma_exp: f64,
    m: f64,
    value: f64,
}

#[derive(Serialize)]
struct RateFileSummary {
    converged: bool,
    iterations: usize,
    distances: Vec<f64>,
    contraction_ratios: Vec<f64>,
    norms: Vec<NormEntry>,
    max_weighted_residual: f64,
}

fn run_rate(cfg: &ExperimentConfig, out: &Path, verbose: bool) -> Result<Outcome, CliError> {
    let window = cfg.window.window()?;
    note!(verbose, "rate: T = {}, epsT = {}, sigma = {}", window.t_final, window.eps_t, cfg.rate.picard.sigma);
    let rep = solve_rate(&window, &cfg.rate.picard, cfg.rate.profile_points)?;
    let mut table = Table::new(&["t", "T_minus_t", "R_pstar", "R_p1", "R_p2", "weighted_R"]);
    let mut worst = 0.0f64;
    for r in &rep.residual_profile {
        let w = r.r_p2.abs() * r.weight();
        worst = worst.max(w);
        table.push(vec![r.t, r.gap, r.r_star, r.r_p1, r.r_p2, w])?;
    }
    write_csv(&out.join("residual_profile.csv"), cfg, &table)?;

    let ell = ksblow::rate::rate_nodes(&window, cfg.rate.picard.nodes);
    let mut samples = Table::new(&["ell", "T_minus_t", "p_star", "p1", "p2"]);
    let star = RateFunction::star(window);
    for &l in ell.iter().filter(|&&l| l >= window.ell_start()) {
        samples.push(vec![l, (-l).exp(), star.p_ell(l), rep.p1.p_ell(l), rep.p2.p_ell(l)])?;
    }
    write_csv(&out.join("rate_samples.csv"), cfg, &samples)?;

    let ratios = rep.distances.windows(2).map(|w| w[1] / w[0]).collect();
    let summary = RateFileSummary {
        converged: rep.converged,
        iterations: rep.distances.len(),
        distances: rep.distances.clone(),
        contraction_ratios: ratios,
        norms: rep.fitted_norm_constants.iter().map(|(n, v)| NormEntry { gamma_exp: n.gamma_exp, m: n.m, value: *v }).collect(),
        max_weighted_residual: worst,
    };
    write_json(&out.join("rate_summary.json"), &summary)?;
    note!(verbose, "rate: converged = {} after {} iterations", rep.converged, summary.iterations);
    Ok(Outcome::Done)
}

fn run_mass_phi(cfg: &ExperimentConfig, out: &Path, verbose: bool) -> Result<Outcome, CliError> {
    let window = cfg.window.window()?;
    let star = RateFunction::star(window);
    let times: Vec<f64> = cfg.mass_phi.gaps.iter().map(|g| window.t_final - g).collect();
    note!(verbose, "mass-phi: stepping to {} checkpoints", times.len());
    let stepped = run_phi_lambda(&star, &window, &times, &cfg.mass_phi.run)?;
    let spec = QuadratureSpec::default();
    let mut table = Table::new(&["t", "T_minus_t", "mass_duhamel", "mass_stepper", "expansion_phi1", "expansion_rhs"]);
    for (&t, c) in times.iter().zip(&stepped) {
        table.push(vec![
            t,
            window.gap(t),
            mass_phi1_duhamel(&star, &window, t, &spec)?,
            c.mass,
            expansion_phi1(&star, &window, t, &spec)?,
            expansion_rhs(&star, &window, t, &operator_spec())?,
        ])?;
    }
    write_csv(&out.join("mass_phi.csv"), cfg, &table)?;
    Ok(Outcome::Done)
}
