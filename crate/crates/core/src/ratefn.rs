//! Time window and sampled rate functions p(t) = λλ̇(t).
//!
//! Times are handled through the gap x = T − t and the log-gap ℓ = −ln x.

use std::sync::Arc;

use crate::error::{check, Error, Result};
use crate::interp::Pchip;
use crate::profiles::{consts, p_star_gap, p_star_integral_gap};
use crate::quad::gk21;

/// The interval (−ε(T), T) with the cutoff scale δ.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeWindow {
    pub t_final: f64,
    pub eps_t: f64,
    pub delta: f64,
}

impl TimeWindow {
    pub fn new(t_final: f64, eps_t: f64, delta: f64) -> Result<Self> {
        match Self::violations(t_final, eps_t, delta).into_iter().next() {
            Some(e) => Err(e),
            None => Ok(Self { t_final, eps_t, delta }),
        }
    }

    /// Every violated window constraint.
    pub fn violations(t_final: f64, eps_t: f64, delta: f64) -> Vec<Error> {
        let mut out: Vec<Error> = [
            check(t_final > 0.0, "T", t_final, "> 0"),
            check(delta > 0.0, "delta", delta, "> 0"),
            check(eps_t > t_final, "epsT", eps_t, "> T"),
            check(eps_t < 1.0, "epsT", eps_t, "< 1"),
            check(t_final + eps_t < 1.0, "T + epsT", t_final + eps_t, "< 1"),
        ]
        .into_iter()
        .filter_map(|r| r.err())
        .collect();
        if t_final > 0.0 && t_final < 1.0 && eps_t > 0.0 && eps_t < 1.0 {
            let a2 = 2.0 * consts().a;
            let lt = t_final.ln().abs();
            let le = eps_t.ln().abs();
            let lhs = (-2.0 * a2 * lt.sqrt()).exp() * lt.sqrt() / t_final;
            let rhs = (-a2 * le.sqrt()).exp() / eps_t;
            if let Err(e) = check(lhs >= rhs, "T", t_final, "e^{-4a sqrt|ln T|} sqrt|ln T| / T >= e^{-2a sqrt|ln epsT|} / epsT") {
                out.push(e);
            }
        }
        out
    }

    /// T = 1e-4, ε(T) = 0.1, δ = 0.1.
    pub fn default_window() -> Self {
        Self::new(1e-4, 1e-1, 0.1).expect("default window valid")
    }

    pub fn gap(&self, t: f64) -> f64 {
        self.t_final - t
    }

    /// Log-gap at the start time −ε(T).
    pub fn ell_start(&self) -> f64 {
        -(self.t_final + self.eps_t).ln()
    }

    pub fn contains(&self, t: f64) -> bool {
        t > -self.eps_t && t < self.t_final
    }

    /// Log-uniform nodes in T − t over [1e-6·T, T + ε(T)], returned as increasing ℓ.
    pub fn log_nodes(&self, n: usize) -> Vec<f64> {
        let lo = self.ell_start();
        let hi = -(1e-6 * self.t_final).ln();
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

/// Samples on increasing ℓ nodes with monotone cubic interpolation.
///
/// Beyond the last node the function follows the p★ shape e^{−√(2ℓ)};
/// before the first node it is held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    pchip: Pchip,
}

impl SampledFn {
    pub fn new(ell: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(Self { pchip: Pchip::new(ell, values)? })
    }

    pub fn from_fn(ell: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(ell.to_vec(), ell.iter().map(|&l| f(l)).collect())
    }

    pub fn ell(&self) -> &[f64] {
        self.pchip.xs()
    }

    pub fn values(&self) -> &[f64] {
        self.pchip.ys()
    }

    pub fn ell_hi(&self) -> f64 {
        *self.pchip.xs().last().expect("nonempty")
    }

    pub fn at_ell(&self, ell: f64) -> f64 {
        let hi = self.ell_hi();
        if ell > hi {
            let y = *self.pchip.ys().last().expect("nonempty");
            y * ((2.0 * hi).sqrt() - (2.0 * ell).sqrt()).exp()
        } else {
            self.pchip.eval(ell)
        }
    }

    pub fn at_gap(&self, x: f64) -> f64 {
        self.at_ell(-x.ln())
    }

    pub fn derivative_ell(&self, ell: f64) -> f64 {
        self.pchip.derivative(ell)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Correction {
    f: SampledFn,
    // ∫_{ℓᵢ}^∞ c(ℓ)e^{−ℓ} dℓ = ∫₀^{xᵢ} c dx
    tail: Vec<f64>,
    // ∫_{ℓᵢ}^∞ c(ℓ) dℓ
    ltail: Vec<f64>,
}

impl Correction {
    fn new(f: SampledFn) -> Self {
        let ell = f.ell();
        let n = ell.len();
        let hi = ell[n - 1];
        let mut tail = vec![0.0; n];
        let y = f.values()[n - 1];
        tail[n - 1] = y / p_star_gap((-hi).exp()) * p_star_integral_gap((-hi).exp());
        let mut ltail = vec![0.0; n];
        ltail[n - 1] = y * ((2.0 * hi).sqrt() + 1.0);
        for i in (0..n - 1).rev() {
            let g = |l: f64| f.at_ell(l) * (-l).exp();
            tail[i] = tail[i + 1] + gk21(&g, ell[i], ell[i + 1]).0;
            ltail[i] = ltail[i + 1] + gk21(&|l: f64| f.at_ell(l), ell[i], ell[i + 1]).0;
        }
        Self { f, tail, ltail }
    }

    fn log_integral(&self, ell: f64) -> f64 {
        let nodes = self.f.ell();
        let n = nodes.len();
        let hi = nodes[n - 1];
        if ell >= hi {
            let v = (2.0 * ell).sqrt();
            return self.f.values()[n - 1] * ((2.0 * hi).sqrt() - v).exp() * (v + 1.0);
        }
        let g = |l: f64| self.f.at_ell(l);
        if ell < nodes[0] {
            return self.ltail[0] + gk21(&g, ell, nodes[0]).0;
        }
        match nodes.binary_search_by(|v| v.total_cmp(&ell)) {
            Ok(i) => self.ltail[i],
            Err(i) => self.ltail[i] + gk21(&g, ell, nodes[i]).0,
        }
    }

    fn integral_gap(&self, x: f64) -> f64 {
        let ell = -x.ln();
        let nodes = self.f.ell();
        let n = nodes.len();
        if ell >= nodes[n - 1] {
            let y = self.f.values()[n - 1];
            return y / p_star_gap((-nodes[n - 1]).exp()) * p_star_integral_gap(x);
        }
        let i = match nodes.binary_search_by(|v| v.total_cmp(&ell)) {
            Ok(i) => return self.tail[i],
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let g = |l: f64| self.f.at_ell(l) * (-l).exp();
        if ell < nodes[0] {
            return self.tail[0] + gk21(&g, ell, nodes[0]).0;
        }
        self.tail[i + 1] + gk21(&g, ell, nodes[i + 1]).0
    }
}

/// A rate p(t) = [p★(t)] + correction(t) on a time window.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFunction {
    window: TimeWindow,
    star: bool,
    corr: Option<Arc<Correction>>,
}

impl RateFunction {
    /// The closed-form p★.
    pub fn star(window: TimeWindow) -> Self {
        Self { window, star: true, corr: None }
    }

    pub fn zero(window: TimeWindow) -> Self {
        Self { window, star: false, corr: None }
    }

    /// A sampled rate, optionally added on top of p★.
    pub fn sampled(window: TimeWindow, f: SampledFn, include_star: bool) -> Self {
        Self { window, star: include_star, corr: Some(Arc::new(Correction::new(f))) }
    }

    /// Adds the sampled part of `other` (same nodes) to this rate.
    pub fn plus(&self, other: &RateFunction) -> Result<Self> {
        let star = self.star || other.star;
        if self.star && other.star {
            return Err(Error::Precondition { what: "at most one p-star term", measured: 2.0 });
        }
        let corr = match (&self.corr, &other.corr) {
            (None, c) | (c, None) => c.clone(),
            (Some(a), Some(b)) => {
                if a.f.ell() != b.f.ell() {
                    return Err(Error::Grid("rate corrections on different nodes".into()));
                }
                let v = a.f.values().iter().zip(b.f.values()).map(|(x, y)| x + y).collect();
                Some(Arc::new(Correction::new(SampledFn::new(a.f.ell().to_vec(), v)?)))
            }
        };
        Ok(Self { window: self.window, star, corr })
    }

    /// True when no term contributes.
    pub fn is_zero(&self) -> bool {
        !self.star && self.corr.as_ref().is_none_or(|c| c.f.values().iter().all(|v| *v == 0.0))
    }

    pub fn window(&self) -> &TimeWindow {
        &self.window
    }

    pub fn has_star(&self) -> bool {
        self.star
    }

    pub fn correction(&self) -> Option<&SampledFn> {
        self.corr.as_deref().map(|c| &c.f)
    }

    /// p at gap x = T − t.
    pub fn p_gap(&self, x: f64) -> f64 {
        let mut v = if self.star { p_star_gap(x) } else { 0.0 };
        if let Some(c) = &self.corr {
            v += c.f.at_gap(x);
        }
        v
    }

    /// p at log-gap ℓ = −ln(T − t); usable where e^{−ℓ} underflows.
    pub fn p_ell(&self, ell: f64) -> f64 {
        let mut v = if self.star { -0.5 * consts().c_star * (-(2.0 * ell).sqrt()).exp() } else { 0.0 };
        if let Some(c) = &self.corr {
            v += c.f.at_ell(ell);
        }
        v
    }

    /// ∫_ℓ^∞ p dℓ′ = ∫ₜᵀ p(s)/(T−s) ds.
    pub fn log_integral_from(&self, ell: f64) -> f64 {
        let mut v = 0.0;
        if self.star {
            let w = (2.0 * ell).sqrt();
            v -= 0.5 * consts().c_star * (w + 1.0) * (-w).exp();
        }
        if let Some(c) = &self.corr {
            v += c.log_integral(ell);
        }
        v
    }

    pub fn p(&self, t: f64) -> f64 {
        self.p_gap(self.window.gap(t))
    }

    /// ∫ₜᵀ p(s) ds as a function of the gap.
    pub fn integral_to_final_gap(&self, x: f64) -> f64 {
        let mut v = if self.star { p_star_integral_gap(x) } else { 0.0 };
        if let Some(c) = &self.corr {
            v += c.integral_gap(x);
        }
        v
    }

    /// λ² = −2∫ₜᵀ p at gap x.
    pub fn lambda2_gap(&self, x: f64) -> f64 {
        -2.0 * self.integral_to_final_gap(x)
    }

    pub fn lambda2(&self, t: f64) -> f64 {
        self.lambda2_gap(self.window.gap(t))
    }

    /// Values of p at the given ℓ nodes.
    pub fn samples(&self, ell: &[f64]) -> Vec<f64> {
        ell.iter().map(|&l| self.p_gap((-l).exp())).collect()
    }
}
