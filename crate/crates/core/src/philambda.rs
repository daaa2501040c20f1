//! The correction field φ_λ: source E, radial Δ₆ time stepper, Duhamel mass and mass expansion.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::profiles::{bubble_u, bubble_u_prime, consts, z0_mode, Cutoff, EULER_GAMMA};
use crate::quad::{gk21, integrate_best, integrate_breaks, QuadratureSpec};
use crate::specialfn::{beta_const, heat6_factor};
use crate::tridiag;

pub use crate::ratefn::{RateFunction, SampledFn, TimeWindow};

/// Which part of E drives the stepper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// (λ̇/λ³)Z₀(ȳ)χ₀(w̄) only.
    Phi1,
    /// The full E including the cutoff commutator terms.
    Full,
}

/// Scale quantities at time t.
#[derive(Debug, Clone, Copy)]
struct Scales {
    lambda: f64,
    lambda2: f64,
    p: f64,
    gap: f64,
    cut: f64,
}

fn scales(rate: &RateFunction, window: &TimeWindow, t: f64) -> Result<Scales> {
    if !window.contains(t) {
        return Err(Error::Domain { name: "t", value: t, constraint: "inside (-epsT, T)" });
    }
    let gap = window.gap(t);
    let lambda2 = rate.lambda2_gap(gap);
    let p = rate.p_gap(gap);
    Ok(Scales { lambda: lambda2.max(0.0).sqrt(), lambda2, p, gap, cut: (window.delta * gap).sqrt() })
}

/// ∂_r v₀ for u₀ = λ⁻²U(r/λ)χ₀(r/L).
fn dv0(r: f64, s: &Scales, cutoff: Cutoff) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let core = |x: f64| {
        let q = (x / s.lambda).powi(2);
        4.0 * q / (1.0 + q)
    };
    let m = if r <= s.cut {
        core(r)
    } else {
        let f = |y: f64| bubble_u(y / s.lambda) * cutoff.value(y / s.cut) * y / s.lambda2;
        core(s.cut) + gk21(&f, s.cut, r.min(2.0 * s.cut)).0
    };
    -m / r
}

fn source_at(r: f64, s: &Scales, cutoff: Cutoff, kind: Source) -> f64 {
    if s.lambda2 <= 0.0 {
        return 0.0;
    }
    let y = r / s.lambda;
    let w = r / s.cut;
    let l4 = s.lambda2 * s.lambda2;
    let mut e = s.p / l4 * z0_mode(y) * cutoff.value(w);
    if kind == Source::Full && w > 1.0 && w < 2.0 {
        let c1 = cutoff.d1(w);
        let c2 = cutoff.d2(w);
        let u = bubble_u(y);
        e += -u * c1 * w / (2.0 * s.lambda2 * s.gap);
        e += 2.0 * c1 * bubble_u_prime(y) / (s.lambda2 * s.lambda * s.cut);
        e += (c2 + c1 / w) * u / (s.cut * s.cut * s.lambda2);
        e += -u * c1 * dv0(r, s, cutoff) / (s.lambda2 * s.cut);
    }
    e
}

/// E(r, t; λ) for the radial case.
pub fn eval_e(r: f64, t: f64, rate: &RateFunction, window: &TimeWindow, cutoff: Cutoff) -> Result<f64> {
    let s = scales(rate, window, t)?;
    Ok(source_at(r, &s, cutoff, Source::Full))
}

/// The Z₀χ₀ part of E alone.
pub fn eval_e_phi1(r: f64, t: f64, rate: &RateFunction, window: &TimeWindow, cutoff: Cutoff) -> Result<f64> {
    let s = scales(rate, window, t)?;
    Ok(source_at(r, &s, cutoff, Source::Phi1))
}

/// Conservative radial Δ₆ = ∂²_r + (5/r)∂_r on a node grid (zero value at the outer node).
#[derive(Debug, Clone)]
pub struct SixDimHeat {
    grid: Arc<RadialGrid>,
    vol: Vec<f64>,
    cond: Vec<f64>,
}

impl SixDimHeat {
    pub fn new(grid: Arc<RadialGrid>) -> Result<Self> {
        let r = grid.radii();
        if r[0] != 0.0 {
            return Err(Error::Grid("six-dimensional heat grid must start at r = 0".into()));
        }
        let n = r.len();
        let face = |i: usize| 0.5 * (r[i] + r[i + 1]);
        let vol = (0..n)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { face(i - 1) };
                let hi = if i + 1 < n { face(i) } else { r[i] };
                (hi.powi(6) - lo.powi(6)) / 6.0
            })
            .collect();
        let cond = (0..n - 1).map(|i| face(i).powi(5) / (r[i + 1] - r[i])).collect();
        Ok(Self { grid, vol, cond })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    /// Implicit Euler: (φ⁺ − φ)/dt = Δ₆φ⁺ + source.
    pub fn implicit_step(&self, phi: &[f64], source: &[f64], dt: f64) -> Result<Vec<f64>> {
        let n = phi.len();
        let mut a = vec![0.0; n];
        let mut b = self.vol.clone();
        let mut c = vec![0.0; n];
        let mut d: Vec<f64> = (0..n).map(|i| self.vol[i] * (phi[i] + dt * source[i])).collect();
        for i in 0..n - 1 {
            let k = dt * self.cond[i];
            b[i] += k;
            c[i] -= k;
            b[i + 1] += k;
            a[i + 1] -= k;
        }
        // Dirichlet row at the outer node
        a[n - 1] = 0.0;
        b[n - 1] = 1.0;
        d[n - 1] = 0.0;
        tridiag::solve(&a, &b, &c, &d)
    }
}

/// One implicit-Euler step of ∂_tφ = Δ₆φ + E with E at the new time t + dt.
pub fn step_phi_lambda(
    state: &RadialField,
    t: f64,
    dt: f64,
    rate: &RateFunction,
    window: &TimeWindow,
    kind: Source,
) -> Result<RadialField> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Domain { name: "dt", value: dt, constraint: "> 0" });
    }
    let heat = SixDimHeat::new(state.grid().clone())?;
    let s = scales(rate, window, t + dt)?;
    let src: Vec<f64> = state.radii().iter().map(|&r| source_at(r, &s, Cutoff::Quintic, kind)).collect();
    let v = heat.implicit_step(state.values(), &src, dt)?;
    RadialField::new(state.grid().clone(), v)
}

/// Settings for a full φ_λ run from t = −ε(T).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhiRunConfig {
    /// dt = dt_fraction·(T − t).
    pub dt_fraction: f64,
    pub nodes: usize,
    /// Outer radius in units of √(T + ε(T)).
    pub outer: f64,
    pub source: Source,
}

impl Default for PhiRunConfig {
    fn default() -> Self {
        Self { dt_fraction: 0.02, nodes: 1500, outer: 20.0, source: Source::Phi1 }
    }
}

/// Diagnostics of φ_λ at a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhiCheckpoint {
    pub t: f64,
    pub mass: f64,
    /// sup_{r ≤ √(T−t)} |φ|(λ²+r²)e^{√(2|ln(T−t)|)}.
    pub bound_ratio: f64,
}

/// Integrates φ_λ from zero at −ε(T) through the increasing checkpoints.
pub fn run_phi_lambda(rate: &RateFunction, window: &TimeWindow, checkpoints: &[f64], cfg: &PhiRunConfig) -> Result<Vec<PhiCheckpoint>> {
    let t_last = *checkpoints.last().ok_or(Error::Precondition { what: "checkpoints", measured: 0.0 })?;
    if !window.contains(t_last) || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain { name: "checkpoint", value: t_last, constraint: "increasing inside (-epsT, T)" });
    }
    let lam_min = rate.lambda2_gap(window.gap(t_last)).sqrt();
    let r_max = cfg.outer * (window.t_final + window.eps_t).sqrt();
    let grid = Arc::new(RadialGrid::geometric(lam_min / 8.0, r_max, cfg.nodes)?);
    let heat = SixDimHeat::new(grid.clone())?;
    let mut phi = vec![0.0; grid.len()];
    let mut t = -window.eps_t;
    let mut out = Vec::with_capacity(checkpoints.len());
    for &tc in checkpoints {
        while t < tc {
            let mut dt = cfg.dt_fraction * window.gap(t);
            if t + dt > tc || tc - (t + dt) < 0.1 * dt {
                dt = tc - t;
            }
            let s = scales(rate, window, t + dt)?;
            let src: Vec<f64> = grid.radii().iter().map(|&r| source_at(r, &s, Cutoff::Quintic, cfg.source)).collect();
            phi = heat.implicit_step(&phi, &src, dt)?;
            t += dt;
        }
        let f = RadialField::new(grid.clone(), phi.clone())?;
        let s = scales(rate, window, tc)?;
        let w = (2.0 * s.gap.ln().abs()).sqrt().exp();
        let bound_ratio = grid
            .radii()
            .iter()
            .zip(&phi)
            .filter(|(r, _)| **r <= s.gap.sqrt())
            .map(|(r, v)| v.abs() * (s.lambda2 + r * r) * w)
            .fold(0.0, f64::max);
        out.push(PhiCheckpoint { t: tc, mass: f.integral(), bound_ratio });
    }
    Ok(out)
}

/// r-integral of the Duhamel kernel at (t, s) divided by λ²(s)⁻¹ scaling, i.e.
/// ∫[1 − e^{−kz²}(1 + kz²)]Z₀(z)χ₀(z/Lc)z dz / λ²(s).
fn duhamel_inner(lambda2_s: f64, gap_s: f64, tau: f64, delta: f64, cutoff: Cutoff, spec: &QuadratureSpec) -> f64 {
    let lc = (delta * gap_s / lambda2_s).sqrt();
    // ∫Z₀χ₀(z/Lc)z dz = −∫ z²U(z)χ₀′(z/Lc)/Lc dz since Z₀z = (z²U)′
    let a = integrate_best(&|z: f64| -z * z * bubble_u(z) * cutoff.d1(z / lc) / lc, &[lc, 1.5 * lc, 2.0 * lc], spec).value;
    let k = lambda2_s / (4.0 * tau);
    let zmax = (2.0 * lc).min((60.0 / k).sqrt());
    let g = |z: f64| {
        let x = k * z * z;
        (-x).exp() * (1.0 + x) * z0_mode(z) * cutoff.value(z / lc) * z
    };
    let mut pts = vec![0.0];
    for b in [0.5, 1.0, 3.0, lc, 1.5 * lc] {
        if b < zmax && b > *pts.last().unwrap() {
            pts.push(b);
        }
    }
    pts.push(zmax);
    let b = integrate_best(&g, &pts, spec).value;
    (a - b) / lambda2_s
}

/// Mass of φ_λ⁽¹⁾ at time t from the exact Duhamel representation.
pub fn mass_phi1_duhamel(rate: &RateFunction, window: &TimeWindow, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    if t <= -window.eps_t {
        return Ok(0.0);
    }
    if !(t > -window.t_final / 2.0 && t < window.t_final) {
        return Err(Error::Domain { name: "t", value: t, constraint: "inside (-T/2, T)" });
    }
    let cutoff = Cutoff::Quintic;
    let gap = window.gap(t);
    let l2t = rate.lambda2_gap(gap);
    if l2t <= 0.0 {
        return Ok(0.0);
    }
    let inner_spec = spec.with_rel(spec.rel_tol * 1e-2);
    let f = |u: f64| {
        let tau = u.exp();
        let gs = gap + tau;
        let p = rate.p_gap(gs);
        if p == 0.0 {
            return 0.0;
        }
        let l2 = rate.lambda2_gap(gs);
        p * duhamel_inner(l2, gs, tau, window.delta, cutoff, &inner_spec) * tau
    };
    let lo = (1e-6 * l2t).ln();
    let hi = (t + window.eps_t).ln();
    let mut pts = vec![lo];
    for b in [l2t.ln(), gap.ln()] {
        if b > *pts.last().unwrap() && b < hi {
            pts.push(b);
        }
    }
    pts.push(hi);
    let r = integrate_breaks(f, &pts, spec)?;
    Ok(2.0 * PI * r.value)
}

/// ∫_{−ε(T)}^{t−λ²(t)} p(s)/(t−s) ds, log-spaced in t − s.
pub fn memory_integral(rate: &RateFunction, window: &TimeWindow, t: f64, lambda2: f64, spec: &QuadratureSpec) -> Result<f64> {
    crate::rate::memory_integral_gap(rate, window.gap(t), lambda2, spec)
}

/// 4π∫_{−ε}^T p/(T−s) − 4π∫_{−ε}^{t−λ²} p/(t−s) + 4π(γ+1−ln4)p(t).
pub fn expansion_rhs(rate: &RateFunction, window: &TimeWindow, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let gap = window.gap(t);
    let p = rate.p_gap(gap);
    let l2 = rate.lambda2_gap(gap);
    if l2 <= 0.0 && p == 0.0 {
        return Ok(0.0);
    }
    let kappa = consts().kappa;
    Ok(4.0 * PI * (crate::rate::final_integral(rate) - memory_integral(rate, window, t, l2, spec)? + kappa * p))
}

/// (32π/δ)∫_{−ε}^t p(s)/(T−s)∫₀^∞[1 − e^{−z²r/4}(1 + z²r/4)](1 − χ₀(z))/z³ dz ds, r = δ(T−s)/(t−s).
pub fn cutoff_double_integral(rate: &RateFunction, window: &TimeWindow, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let cutoff = Cutoff::Quintic;
    let gap = window.gap(t);
    let inner_spec = spec.with_rel(spec.rel_tol * 1e-2);
    let inner = |rr: f64| {
        let zc = 2f64.max((160.0 / rr).sqrt());
        let g = |z: f64| {
            let w = z * rr.sqrt();
            heat6_factor(w) * w.powi(4) * (1.0 - cutoff.value(z)) / (z * z * z)
        };
        integrate_best(&g, &[1.0, 1.5, 2.0, zc], &inner_spec).value + 0.5 / (zc * zc)
    };
    let f = |u: f64| {
        let tau = u.exp();
        let gs = gap + tau;
        rate.p_gap(gs) / gs * inner(window.delta * gs / tau) * tau
    };
    let lo = (1e-10 * gap).ln();
    let hi = (t + window.eps_t).ln();
    let pts = [lo, gap.ln(), hi];
    Ok(32.0 * PI / window.delta * integrate_breaks(f, &pts, spec)?.value)
}

/// Small-gap expansion of the φ⁽¹⁾ mass without its constant:
/// cutoff double integral − 4π∫^{t−λ²}p/(t−s) + 4πκp(t).
pub fn expansion_phi1(rate: &RateFunction, window: &TimeWindow, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let gap = window.gap(t);
    let l2 = rate.lambda2_gap(gap);
    let p = rate.p_gap(gap);
    let kappa = consts().kappa;
    Ok(cutoff_double_integral(rate, window, t, spec)? - 4.0 * PI * memory_integral(rate, window, t, l2, spec)? + 4.0 * PI * kappa * p)
}

/// Expansion of the full φ_λ mass without its constant: expansion_rhs + 16πβλ²/(δ(T−t)).
pub fn expansion_full(rate: &RateFunction, window: &TimeWindow, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    let gap = window.gap(t);
    let beta = beta_const(Cutoff::Quintic, spec)?;
    Ok(expansion_rhs(rate, window, t, spec)? + 16.0 * PI * beta * rate.lambda2_gap(gap) / (window.delta * gap))
}

/// Extrapolated total mass of φ_λ at t = T.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FinalMass {
    /// Mean of mass(t) − expansion_full(t) over the checkpoints.
    pub mass: f64,
    /// Largest deviation of a checkpoint from the mean.
    pub spread: f64,
    pub checkpoints: Vec<PhiCheckpoint>,
}

/// Steps φ_λ with the full source to t = T − gap for each gap (decreasing) and
/// extrapolates the mass with the time-dependent part of the expansion removed.
pub fn mass_at_final_time(rate: &RateFunction, window: &TimeWindow, gaps: &[f64], cfg: &PhiRunConfig, spec: &QuadratureSpec) -> Result<FinalMass> {
    let times: Vec<f64> = gaps.iter().map(|g| window.t_final - g).collect();
    let cfg = PhiRunConfig { source: Source::Full, ..*cfg };
    let checkpoints = run_phi_lambda(rate, window, &times, &cfg)?;
    let offs: Vec<f64> = checkpoints.iter().map(|c| Ok(c.mass - expansion_full(rate, window, c.t, spec)?)).collect::<Result<_>>()?;
    let mass = offs.iter().sum::<f64>() / offs.len() as f64;
    let spread = offs.iter().map(|o| (o - mass).abs()).fold(0.0, f64::max);
    Ok(FinalMass { mass, spread, checkpoints })
}

/// Leading mass of φ_λ at t = T: 2√2πe^{−(γ+2)}e^{−√(2|ln ε|)}√(2|ln ε|).
pub fn mass_at_t_formula(eps_t: f64) -> Result<f64> {
    crate::error::check(eps_t > 0.0 && eps_t < 1.0, "epsT", eps_t, "in (0, 1)")?;
    let v = (2.0 * eps_t.ln().abs()).sqrt();
    Ok(2.0 * std::f64::consts::SQRT_2 * PI * (-(EULER_GAMMA + 2.0)).exp() * (-v).exp() * v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_value() {
        assert!((mass_at_t_formula(1e-6).unwrap() - 1.851e-2).abs() < 1e-5);
        assert!(mass_at_t_formula(1.0).is_err());
    }

    #[test]
    fn source_at_origin() {
        let w = TimeWindow::default_window();
        let r = RateFunction::star(w);
        let t = 5e-5;
        let l2 = r.lambda2(t);
        let e = eval_e(0.0, t, &r, &w, Cutoff::Quintic).unwrap();
        assert!((e / (16.0 * r.p(t) / (l2 * l2)) - 1.0).abs() < 1e-12);
    }
}
