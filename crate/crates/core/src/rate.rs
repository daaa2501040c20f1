//! The nonlocal rate equation, its resolvent, and the fixed point for the corrections p₁, p₂.
//!
//! Everything is evaluated in the gap x = T − t or the log-gap ℓ = −ln x, so times
//! arbitrarily close to T stay representable.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{check, Error, Result};
use crate::profiles::{consts, eta, p_star_gap, p_star_integral_gap};
use crate::quad::{integrate_best, integrate_breaks, QuadratureSpec};
use crate::ratefn::{RateFunction, SampledFn, TimeWindow};

/// Sample nodes beyond 1e-6·T continue to this log-gap with a coarser step.
pub const TAIL_ELL: f64 = 200.0;
const TAIL_STEP: f64 = 0.5;

/// Tolerances used by the rate operators.
pub fn operator_spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-16, rel_tol: 1e-9, max_subdivisions: 4000, ..QuadratureSpec::default() }
}

/// `n` log-uniform nodes over [1e-6·T, T + ε(T)] followed by a tail up to ℓ = 200.
pub fn rate_nodes(window: &TimeWindow, n: usize) -> Vec<f64> {
    let mut ell = window.log_nodes(n);
    let mut l = *ell.last().expect("n >= 2") + TAIL_STEP;
    while l <= TAIL_ELL {
        ell.push(l);
        l += TAIL_STEP;
    }
    ell
}

/// Weighted norm ‖p‖_{γ,m} = sup |ln(T−t)|^m e^{2aγ√|ln(T−t)|}|p(t)|.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LogNorm {
    pub gamma_exp: f64,
    pub m: f64,
}

impl LogNorm {
    pub fn new(gamma_exp: f64, m: f64) -> Result<Self> {
        check(gamma_exp >= 1.0, "gamma_exp", gamma_exp, ">= 1")?;
        Ok(Self { gamma_exp, m })
    }

    pub fn weight(&self, ell: f64) -> f64 {
        ell.powf(self.m) * (2.0 * consts().a * self.gamma_exp * ell.sqrt()).exp()
    }

    /// Sup over the given nodes.
    pub fn norm(&self, ell: &[f64], values: &[f64]) -> f64 {
        ell.iter().zip(values).map(|(&l, v)| self.weight(l) * v.abs()).fold(0.0, f64::max)
    }

    pub fn norm_of(&self, ell: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        ell.iter().map(|&l| self.weight(l) * f(l).abs()).fold(0.0, f64::max)
    }
}

fn ell_of(x: f64) -> f64 {
    -x.ln()
}

/// ∫_{−ε(T)}^{t−λ²} p(s)/(t−s) ds at gap x, integrated in u = ln(t−s).
pub fn memory_integral_gap(p: &RateFunction, x: f64, lambda2: f64, spec: &QuadratureSpec) -> Result<f64> {
    let w = p.window();
    let hi = (w.t_final + w.eps_t - x).ln();
    let lo = lambda2.ln();
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::Domain { name: "lambda^2", value: lambda2, constraint: "0 < lambda^2 < t + epsT" });
    }
    let mut pts = vec![lo];
    if x.ln() > lo && x.ln() < hi {
        pts.push(x.ln());
    }
    pts.push(hi);
    Ok(integrate_breaks(|u: f64| p.p_gap(x + u.exp()), &pts, spec)?.value)
}

/// ∫_{−ε(T)}^T p(s)/(T−s) ds.
pub fn final_integral(p: &RateFunction) -> f64 {
    p.log_integral_from(p.window().ell_start())
}

/// R[p] at gap x: −∫^{t−λ²} p/(t−s) + (γ+1−ln4)p(t) + ∫^T p/(T−s).
pub fn nonlocal_residual_gap(p: &RateFunction, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let w = *p.window();
    check(x > 0.0 && x < w.t_final + w.eps_t, "T - t", x, "inside (0, T + epsT)")?;
    if p.is_zero() {
        return Ok(0.0);
    }
    let l2 = p.lambda2_gap(x);
    if !(l2 > 0.0 && l2 < w.t_final + w.eps_t - x) {
        return Err(Error::Domain { name: "lambda^2", value: l2, constraint: "0 < lambda^2 < t + epsT" });
    }
    let mem = memory_integral_gap(p, x, l2, spec)?;
    Ok(-mem + consts().kappa * p.p_gap(x) + final_integral(p))
}

/// R[p](t) for t ∈ (0, T).
pub fn nonlocal_residual(p: &RateFunction, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let w = p.window();
    check(t > 0.0 && t < w.t_final, "t", t, "inside (0, T)")?;
    nonlocal_residual_gap(p, w.gap(t), spec)
}

/// f★ = −R[p★] at gap x.
pub fn f_star_gap(window: &TimeWindow, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(-nonlocal_residual_gap(&RateFunction::star(*window), x, spec)?)
}

/// f★(t) for t ∈ (−T/2, T).
pub fn f_star(t: f64, window: &TimeWindow, spec: &QuadratureSpec) -> Result<f64> {
    check(t > -window.t_final / 2.0 && t < window.t_final, "t", t, "inside (-T/2, T)")?;
    f_star_gap(window, window.gap(t), spec)
}

/// Left side of the resolvent equation: ∫ₜᵀ g/(T−s) ds − 2a√|ln(T−t)| g(t).
pub fn ode_lhs_gap(g: &RateFunction, x: f64) -> f64 {
    let l = ell_of(x);
    g.log_integral_from(l) - 2.0 * consts().a * l.sqrt() * g.p_gap(x)
}

fn sigma_check(sigma: f64) -> Result<()> {
    check(sigma > 0.0 && sigma < 1.0, "sigma", sigma, "in (0, 1)")
}

/// A_σ[p] at gap x.
pub fn a_sigma_gap(p: &RateFunction, x: f64, sigma: f64, spec: &QuadratureSpec) -> Result<f64> {
    sigma_check(sigma)?;
    let w = p.window();
    let l = ell_of(x);
    let n = l.powf(0.25);
    check(x * (1.0 + n) < w.t_final + w.eps_t, "t - N(t)(T-t)", w.t_final - x * (1.0 + n), "> -epsT")?;
    let px = p.p_gap(x);
    let t1 = -integrate_breaks(|v: f64| p.p_ell(v) - px, &[l - (1.0 + n).ln(), l], spec)?.value;
    let inner = -l - 2.0 * consts().a * sigma * l.sqrt();
    let outer = n.ln() - l;
    let t2 = -integrate_breaks(|u: f64| px - p.p_gap(x + u.exp()), &[inner, -l, outer], spec)?.value;
    let t3 = px - p.integral_to_final_gap(x) / x;
    Ok(t1 + t2 + t3)
}

/// A_σ[p](t).
pub fn a_sigma(p: &RateFunction, t: f64, sigma: f64) -> Result<f64> {
    let w = p.window();
    check(w.contains(t), "t", t, "inside (-epsT, T)")?;
    a_sigma_gap(p, w.gap(t), sigma, &operator_spec())
}

/// B₁[p₁] at gap x, with λ★² = −2∫ₜᵀp★ and λ² = −2∫ₜᵀ(p★ + p₁).
pub fn b1_gap(p1: &RateFunction, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let w = p1.window();
    let l = ell_of(x);
    let n = l.powf(0.25);
    let c = consts();
    let ps = p_star_gap(x);
    let is = p_star_integral_gap(x);
    let i1 = p1.integral_to_final_gap(x);
    let big_x = i1 / is;
    if big_x <= -1.0 {
        return Err(Error::Domain { name: "X", value: big_x, constraint: "> -1" });
    }
    let ls2 = -2.0 * is;
    let l2 = -2.0 * (is + i1);
    let room = w.t_final + w.eps_t - x;
    check(ls2 < room && l2 < room, "lambda^2", ls2.max(l2), "< t + epsT")?;
    let px = p1.p_gap(x);
    let b1 = integrate_breaks(|u: f64| p1.p_gap(x + u.exp()), &[l2.ln(), ls2.ln()], spec)?.value;
    let b2 = -ps * (big_x.ln_1p() - big_x);
    let b3 = -ps * (big_x - i1 / (x * ps));
    let b4 = -(1.0 / n).ln_1p() * px;
    let lo = (x * (1.0 + n)).ln();
    let hi = (w.t_final + w.eps_t).ln();
    let b5 = if lo < hi {
        x * integrate_breaks(|v: f64| p1.p_gap(v.exp()) / (v.exp() - x), &[lo, hi], spec)?.value
    } else {
        0.0
    };
    let b6 = -(ls2 / (c.c_star * x) * (2.0 * c.a * l.sqrt()).exp()).ln() * px;
    Ok(b1 + b2 + b3 + b4 + b5 + b6)
}

/// B₁[p₁](t).
pub fn b1_op(p1: &RateFunction, t: f64) -> Result<f64> {
    let w = p1.window();
    check(w.contains(t), "t", t, "inside (-epsT, T)")?;
    b1_gap(p1, w.gap(t), &operator_spec())
}

/// ∫_{t−(T−t)e^{−2aσ√ℓ}}^{t−λ★²} (p(t) − p(s))/(t−s) ds at gap x.
pub fn k_remainder_gap(p: &RateFunction, x: f64, sigma: f64, spec: &QuadratureSpec) -> Result<f64> {
    sigma_check(sigma)?;
    let l = ell_of(x);
    let ls2 = -2.0 * p_star_integral_gap(x);
    let inner = -l - 2.0 * consts().a * sigma * l.sqrt();
    let px = p.p_gap(x);
    Ok(integrate_breaks(|u: f64| px - p.p_gap(x + u.exp()), &[ls2.ln(), inner], spec)?.value)
}

type LogFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// T₀^{(γ)}[f] with exact pointwise evaluation.
///
/// G(ℓ) = e^{−2a√ℓ}[c + ∫_{ℓ₀}^ℓ e^{2a√ℓ′}f/(2a√ℓ′) dℓ′] and T₀[f] = (G − f)/(2a√ℓ);
/// c = 0 for γ = 1 and c = −∫_{ℓ₀}^∞(...) for γ > 1.
#[derive(Clone)]
pub struct Resolvent {
    gamma_exp: f64,
    window: TimeWindow,
    f: LogFn,
    knots: Vec<f64>,
    prefix: Vec<f64>,
    suffix: Vec<f64>,
}

impl std::fmt::Debug for Resolvent {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("Resolvent").field("gamma_exp", &self.gamma_exp).field("knots", &self.knots.len()).finish()
    }
}

const RESOLVENT_ELL_MAX: f64 = 1e4;

impl Resolvent {
    /// `f` is given as a function of ℓ; `extra_knots` are breakpoints of f (e.g. interpolation nodes).
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, gamma_exp: f64, window: TimeWindow, extra_knots: &[f64]) -> Result<Self> {
        check(gamma_exp >= 1.0, "gamma_exp", gamma_exp, ">= 1")?;
        let f: LogFn = Arc::new(f);
        let l0 = window.ell_start();
        let mut knots = vec![l0];
        let mut k = l0;
        while k < RESOLVENT_ELL_MAX {
            k = if k < 50.0 { k + 0.25 } else { k * 1.02 };
            knots.push(k.min(RESOLVENT_ELL_MAX));
        }
        knots.extend(extra_knots.iter().copied().filter(|&e| e > l0 && e < RESOLVENT_ELL_MAX));
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let a2 = 2.0 * consts().a;
        let spec = QuadratureSpec { abs_tol: 0.0, rel_tol: 1e-13, max_subdivisions: 64, ..QuadratureSpec::default() };
        let phi = |l: f64| {
            let s = l.sqrt();
            (a2 * s).exp() * f(l) / (a2 * s)
        };
        let pieces: Vec<f64> = knots.windows(2).map(|w| integrate_best(&phi, &[w[0], w[1]], &spec).value).collect();
        if pieces.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("resolvent input"));
        }
        let mut prefix = vec![0.0; knots.len()];
        for i in 0..pieces.len() {
            prefix[i + 1] = prefix[i] + pieces[i];
        }
        let mut suffix = vec![0.0; knots.len()];
        if gamma_exp > 1.0 {
            let lm = RESOLVENT_ELL_MAX;
            *suffix.last_mut().expect("knots") = f(lm) * (a2 * lm.sqrt()).exp() / (a2 * consts().a * (gamma_exp - 1.0));
            for i in (0..pieces.len()).rev() {
                suffix[i] = suffix[i + 1] + pieces[i];
            }
        }
        Ok(Self { gamma_exp, window, f, knots, prefix, suffix })
    }

    /// T₀ of a sampled function; beyond its last node f decays like e^{−2aγ√ℓ}.
    pub fn from_sampled(f: &SampledFn, gamma_exp: f64, window: TimeWindow) -> Result<Self> {
        if f.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("resolvent input"));
        }
        let s = f.clone();
        let hi = s.ell_hi();
        let yhi = *s.values().last().expect("nonempty");
        let k = 2.0 * consts().a * gamma_exp;
        let knots = f.ell().to_vec();
        Self::new(
            move |l: f64| if l <= hi { s.at_ell(l) } else { yhi * (k * (hi.sqrt() - l.sqrt())).exp() },
            gamma_exp,
            window,
            &knots,
        )
    }

    pub fn gamma_exp(&self) -> f64 {
        self.gamma_exp
    }

    /// The input f at ℓ.
    pub fn input(&self, ell: f64) -> f64 {
        (self.f)(ell)
    }

    /// T₀[f] at log-gap ℓ ≥ ℓ₀.
    pub fn eval_ell(&self, ell: f64) -> f64 {
        let a2 = 2.0 * consts().a;
        let s = ell.sqrt();
        let f = &self.f;
        let phi = |l: f64| {
            let q = l.sqrt();
            (a2 * q).exp() * f(l) / (a2 * q)
        };
        let i = match self.knots.binary_search_by(|v| v.total_cmp(&ell)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let part = if ell > self.knots[i] { crate::quad::gk21(&phi, self.knots[i], ell).0 } else { 0.0 };
        let g = if self.gamma_exp > 1.0 {
            -(self.suffix[i] - part)
        } else {
            self.prefix[i] + part
        };
        ((-a2 * s).exp() * g - f(ell)) / (a2 * s)
    }

    /// Relative residual |∫_ℓ^∞ g − 2a√ℓ g(ℓ) − f(ℓ)| / |f(ℓ)| of the resolvent equation.
    ///
    /// The absolute tolerance of `spec` is taken relative to |f(ℓ)|.
    pub fn ode_relative_residual(&self, ell: f64, spec: &QuadratureSpec) -> Result<f64> {
        let f = self.input(ell);
        let spec = &QuadratureSpec { abs_tol: spec.abs_tol * f.abs().max(f64::MIN_POSITIVE), ..*spec };
        let mut pts = vec![ell];
        pts.extend(self.knots.iter().copied().filter(|&k| k > ell));
        let tail = integrate_breaks(|l: f64| self.eval_ell(l), &pts, spec)?.value;
        let lhs = tail - 2.0 * consts().a * ell.sqrt() * self.eval_ell(ell);
        Ok((lhs - f).abs() / f.abs())
    }

    /// Samples T₀[f] at the nodes as a correction rate.
    pub fn to_rate(&self, ell: &[f64]) -> Result<RateFunction> {
        let v: Vec<f64> = ell.par_iter().map(|&l| self.eval_ell(l)).collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("resolvent output"));
        }
        Ok(RateFunction::sampled(self.window, SampledFn::new(ell.to_vec(), v)?, false))
    }
}

/// T₀^{(γ)}[f] sampled on the nodes of f.
pub fn resolvent_t0(f: &SampledFn, gamma_exp: f64, window: &TimeWindow) -> Result<RateFunction> {
    Resolvent::from_sampled(f, gamma_exp, *window)?.to_rate(f.ell())
}

/// η(t/T) at gap x.
fn eta_gap(window: &TimeWindow, x: f64) -> f64 {
    eta(1.0 - x / window.t_final)
}

/// Settings of the fixed-point solve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PicardConfig {
    pub sigma: f64,
    pub max_iters: usize,
    pub tol: f64,
    /// Log-uniform nodes on [1e-6·T, T + ε(T)] before the tail.
    pub nodes: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self { sigma: 0.45, max_iters: 60, tol: 1e-10, nodes: 400 }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Every violated constraint.
    pub fn violations(&self) -> Vec<Error> {
        [
            check(self.sigma > 0.0 && self.sigma < 0.5, "sigma", self.sigma, "in (0, 1/2)"),
            check(self.tol > 0.0, "tol", self.tol, "> 0"),
            check(self.nodes >= 16, "nodes", self.nodes as f64, ">= 16"),
            check(self.max_iters >= 1, "max_iters", self.max_iters as f64, ">= 1"),
        ]
        .into_iter()
        .filter_map(|r| r.err())
        .collect()
    }
}

/// Outcome of the fixed point for p₁.
#[derive(Debug, Clone)]
pub struct P1Solution {
    pub p1: RateFunction,
    pub h: SampledFn,
    /// Weighted ‖h_{k+1} − h_k‖_{1,1/4}.
    pub distances: Vec<f64>,
    pub converged: bool,
}

impl P1Solution {
    /// dₖ/dₖ₋₁ for k ≥ 1.
    pub fn ratios(&self) -> Vec<f64> {
        self.distances.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

fn picard_map(p1: &RateFunction, x: f64, fs: f64, sigma: f64, spec: &QuadratureSpec) -> Result<f64> {
    let e = eta_gap(p1.window(), x);
    if e == 0.0 {
        return Ok(0.0);
    }
    Ok(e * (fs + a_sigma_gap(p1, x, sigma, spec)? + b1_gap(p1, x, spec)?))
}

/// Picard iteration h ← η(t/T)[f★ + A_σ[T₀h] + B₁[T₀h]] from h₀ = η f★; p₁ = T₀[h].
pub fn picard_solve_p1(window: &TimeWindow, cfg: &PicardConfig) -> Result<P1Solution> {
    cfg.validate()?;
    let spec = operator_spec();
    let ell = rate_nodes(window, cfg.nodes);
    let fstar: Vec<f64> = ell
        .par_iter()
        .map(|&l| {
            let x = (-l).exp();
            if eta_gap(window, x) == 0.0 {
                Ok(0.0)
            } else {
                f_star_gap(window, x, &spec)
            }
        })
        .collect::<Result<_>>()?;
    picard_from(window, cfg, ell, fstar)
}

/// Picard iteration with a given forcing sampled on the nodes (η is applied here).
pub fn picard_from(window: &TimeWindow, cfg: &PicardConfig, ell: Vec<f64>, forcing: Vec<f64>) -> Result<P1Solution> {
    cfg.validate()?;
    let spec = operator_spec();
    let norm = LogNorm { gamma_exp: 1.0, m: 0.25 };
    let mut h: Vec<f64> = ell.iter().zip(&forcing).map(|(&l, f)| eta_gap(window, (-l).exp()) * f).collect();
    let mut distances = Vec::new();
    let mut growth = 0;
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        let p1 = resolvent_t0(&SampledFn::new(ell.clone(), h.clone())?, 1.0, window)?;
        let next: Vec<f64> = ell
            .par_iter()
            .zip(forcing.par_iter())
            .map(|(&l, &fs)| picard_map(&p1, (-l).exp(), fs, cfg.sigma, &spec))
            .collect::<Result<_>>()?;
        let d = norm.norm(&ell, &next.iter().zip(&h).map(|(a, b)| a - b).collect::<Vec<_>>());
        if !d.is_finite() {
            return Err(Error::NonFinite("picard iterate"));
        }
        if distances.last().is_some_and(|&prev| d > prev) {
            growth += 1;
        } else {
            growth = 0;
        }
        distances.push(d);
        h = next;
        if growth >= 3 {
            return Err(Error::Divergence { history: distances });
        }
        if d < cfg.tol {
            converged = true;
            break;
        }
    }
    let hs = SampledFn::new(ell.clone(), h)?;
    let p1 = resolvent_t0(&hs, 1.0, window)?;
    Ok(P1Solution { p1, h: hs, distances, converged })
}

/// p₂ = T₀^{(1+σ)}[η(t/T)·(−K[p₁])], sampled on the nodes of p₁.
///
/// K[p₁] enters the residual of p★ + p₁ with a plus sign, so p₂ is driven by −K.
pub fn second_correction_p2(p1: &RateFunction, window: &TimeWindow, sigma: f64) -> Result<RateFunction> {
    check(sigma > 0.0 && sigma < 0.5, "sigma", sigma, "in (0, 1/2)")?;
    let nodes = p1.correction().ok_or(Error::Precondition { what: "sampled p1", measured: 0.0 })?.ell().to_vec();
    let spec = operator_spec();
    let rhs: Vec<f64> = nodes
        .par_iter()
        .map(|&l| {
            let x = (-l).exp();
            let e = eta_gap(window, x);
            if e == 0.0 {
                Ok(0.0)
            } else {
                Ok(-e * k_remainder_gap(p1, x, sigma, &spec)?)
            }
        })
        .collect::<Result<_>>()?;
    resolvent_t0(&SampledFn::new(nodes, rhs)?, 1.0 + sigma, window)
}

/// One row of the residual profile.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ResidualRow {
    pub t: f64,
    pub gap: f64,
    pub r_star: f64,
    pub r_p1: f64,
    pub r_p2: f64,
}

impl ResidualRow {
    /// |ln(T−t)|^{1/4}e^{√(2|ln(T−t)|)}.
    pub fn weight(&self) -> f64 {
        LogNorm { gamma_exp: 1.0, m: 0.25 }.weight(ell_of(self.gap))
    }
}

/// p₁, p₂ and the residual profile of p★, p★+p₁, p★+p₁+p₂.
#[derive(Debug, Clone)]
pub struct RateSolveReport {
    pub p1: RateFunction,
    pub p2: RateFunction,
    pub distances: Vec<f64>,
    pub converged: bool,
    pub residual_profile: Vec<ResidualRow>,
    pub fitted_norm_constants: Vec<(LogNorm, f64)>,
}

/// Residual rows at `n` log-uniform gaps in [lo, hi].
pub fn residual_profile(
    window: &TimeWindow,
    p1: &RateFunction,
    p2: &RateFunction,
    gaps: (f64, f64),
    n: usize,
    spec: &QuadratureSpec,
) -> Result<Vec<ResidualRow>> {
    let star = RateFunction::star(*window);
    let s1 = star.plus(p1)?;
    let s2 = s1.plus(p2)?;
    let (lo, hi) = (gaps.0.ln(), gaps.1.ln());
    (0..n)
        .into_par_iter()
        .map(|i| {
            let x = (lo + (hi - lo) * i as f64 / (n.max(2) - 1) as f64).exp();
            Ok(ResidualRow {
                t: window.t_final - x,
                gap: x,
                r_star: nonlocal_residual_gap(&star, x, spec)?,
                r_p1: nonlocal_residual_gap(&s1, x, spec)?,
                r_p2: nonlocal_residual_gap(&s2, x, spec)?,
            })
        })
        .collect()
}

/// Full solve: p₁ by Picard, p₂ from the remainder, residuals on T−t ∈ [1e-3·T, 1e-1·T].
pub fn solve_rate(window: &TimeWindow, cfg: &PicardConfig, profile_points: usize) -> Result<RateSolveReport> {
    let sol = picard_solve_p1(window, cfg)?;
    let p2 = second_correction_p2(&sol.p1, window, cfg.sigma)?;
    let t = window.t_final;
    let residual_profile = residual_profile(window, &sol.p1, &p2, (1e-3 * t, 1e-1 * t), profile_points, &operator_spec())?;
    let ell = sol.h.ell();
    let fitted_norm_constants = vec![
        (LogNorm { gamma_exp: 1.0, m: 0.25 }, LogNorm { gamma_exp: 1.0, m: 0.25 }.norm(ell, sol.h.values())),
        (LogNorm { gamma_exp: 1.0, m: 0.75 }, LogNorm { gamma_exp: 1.0, m: 0.75 }.norm(ell, &sol.p1.samples(ell))),
        (
            LogNorm { gamma_exp: 1.0 + cfg.sigma, m: 0.75 },
            LogNorm { gamma_exp: 1.0 + cfg.sigma, m: 0.75 }.norm(ell, &p2.samples(ell)),
        ),
    ];
    Ok(RateSolveReport { p1: sol.p1, p2, distances: sol.distances, converged: sol.converged, residual_profile, fitted_norm_constants })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rate_has_zero_residual() {
        let w = TimeWindow::default_window();
        let z = RateFunction::zero(w);
        assert_eq!(nonlocal_residual(&z, 5e-5, &operator_spec()).unwrap(), 0.0);
    }

    #[test]
    fn sigma_range_enforced() {
        let cfg = PicardConfig { sigma: 0.6, ..PicardConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
