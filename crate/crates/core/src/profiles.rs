//! Bubble profile, kernel functions, cutoffs and the asymptotic rate law.

use crate::error::{check, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Constants of the rate law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    pub euler_gamma: f64,
    pub a: f64,
    pub c_star: f64,
    pub kappa: f64,
}

impl RateConstants {
    pub fn new() -> Self {
        Self {
            euler_gamma: EULER_GAMMA,
            a: std::f64::consts::FRAC_1_SQRT_2,
            c_star: 4.0 * (-(EULER_GAMMA + 2.0)).exp(),
            kappa: EULER_GAMMA + 1.0 - 4f64.ln(),
        }
    }

    /// γ + 2 + ln(c★/4); zero up to rounding.
    pub fn identity_defect(&self) -> f64 {
        self.euler_gamma + 2.0 + (self.c_star / 4.0).ln()
    }
}

impl Default for RateConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// Shorthand for the default constants.
pub fn consts() -> RateConstants {
    RateConstants::new()
}

/// U(ρ) = 8/(1+ρ²)².
pub fn bubble_u(rho: f64) -> f64 {
    let q = 1.0 + rho * rho;
    8.0 / (q * q)
}

/// dU/dρ.
pub fn bubble_u_prime(rho: f64) -> f64 {
    let q = 1.0 + rho * rho;
    -32.0 * rho / (q * q * q)
}

/// Γ₀ = ln U.
pub fn gamma0(rho: f64) -> f64 {
    8f64.ln() - 2.0 * (rho * rho).ln_1p()
}

/// Z₀ = 2U + ρU′ = (16 − 16ρ²)/(1+ρ²)³.
pub fn z0_mode(rho: f64) -> f64 {
    let r2 = rho * rho;
    let q = 1.0 + r2;
    16.0 * (1.0 - r2) / (q * q * q)
}

/// z₀ = ρΓ₀′ + 2 = 2(1−ρ²)/(1+ρ²), so that Z₀ = U z₀.
pub fn z0_kernel(rho: f64) -> f64 {
    let r2 = rho * rho;
    2.0 * (1.0 - r2) / (1.0 + r2)
}

pub fn z0_kernel_prime(rho: f64) -> f64 {
    let q = 1.0 + rho * rho;
    -8.0 * rho / (q * q)
}

/// Second radial kernel element, normalized so that ρ·W(z₀, z̄₀) = 1.
pub fn z0_bar(rho: f64) -> f64 {
    let r2 = rho * rho;
    ((1.0 - r2) * rho.ln() + 2.0) / (2.0 * (1.0 + r2))
}

pub fn z0_bar_prime(rho: f64) -> f64 {
    let r2 = rho * rho;
    let q = 1.0 + r2;
    let num = -2.0 * rho * rho.ln() + (1.0 - r2) / rho;
    let n = (1.0 - r2) * rho.ln() + 2.0;
    (num * q - n * 2.0 * rho) / (2.0 * q * q)
}

/// Smooth radial cutoff χ₀: 1 on [0,1], 0 on [2,∞).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Cutoff {
    /// C² quintic smoothstep on [1,2].
    #[default]
    Quintic,
    /// Indicator of [0,1]; diagnostics only.
    Sharp,
}

impl Cutoff {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            Cutoff::Quintic => {
                if s <= 1.0 {
                    1.0
                } else if s >= 2.0 {
                    0.0
                } else {
                    let y = s - 1.0;
                    1.0 - y * y * y * (10.0 - 15.0 * y + 6.0 * y * y)
                }
            }
            Cutoff::Sharp => {
                if s <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn d1(&self, s: f64) -> f64 {
        match self {
            Cutoff::Quintic if s > 1.0 && s < 2.0 => {
                let y = s - 1.0;
                -30.0 * y * y * (1.0 - y) * (1.0 - y)
            }
            _ => 0.0,
        }
    }

    pub fn d2(&self, s: f64) -> f64 {
        match self {
            Cutoff::Quintic if s > 1.0 && s < 2.0 => {
                let y = s - 1.0;
                -60.0 * y * (1.0 - y) * (1.0 - 2.0 * y)
            }
            _ => 0.0,
        }
    }
}

/// Time cutoff η: 0 for s ≤ −1/2, 1 for s ≥ 0.
pub fn eta(s: f64) -> f64 {
    Cutoff::Quintic.value(1.0 - 2.0 * s)
}

fn check_gap(gap: f64) -> Result<()> {
    check(gap > 0.0, "T - t", gap, "> 0")?;
    check(gap < 1.0, "T - t", gap, "< 1")
}

/// λ★ as a function of the gap x = T − t (no checks).
pub fn lambda_star_gap(x: f64) -> f64 {
    let g = EULER_GAMMA;
    2.0 * (-(g + 2.0) / 2.0).exp() * x.sqrt() * (-(x.ln().abs() / 2.0).sqrt()).exp()
}

/// p★ as a function of the gap x = T − t (no checks).
pub fn p_star_gap(x: f64) -> f64 {
    -0.5 * consts().c_star * (-(2.0 * x.ln().abs()).sqrt()).exp()
}

/// λ★(t) = 2e^{−(γ+2)/2}√(T−t)e^{−√(|ln(T−t)|/2)}.
pub fn lambda_star(t: f64, t_final: f64) -> Result<f64> {
    check_gap(t_final - t)?;
    Ok(lambda_star_gap(t_final - t))
}

/// p★(t) = −(c★/2)e^{−√(2|ln(T−t)|)}.
pub fn p_star(t: f64, t_final: f64) -> Result<f64> {
    check_gap(t_final - t)?;
    Ok(p_star_gap(t_final - t))
}

/// ∫₀ˣ p★(y) dy in closed form via erfc.
pub fn p_star_integral_gap(x: f64) -> f64 {
    let w = (2.0 * x.ln().abs()).sqrt() + 1.0;
    let tail = (-0.5 * w * w).exp() - (std::f64::consts::PI / 2.0).sqrt() * statrs::function::erf::erfc(w / std::f64::consts::SQRT_2);
    -0.5 * consts().c_star * 0.5f64.exp() * tail
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z0_matches_definition() {
        for i in 0..200 {
            let r = i as f64 * 0.05;
            assert!((2.0 * bubble_u(r) + r * bubble_u_prime(r) - z0_mode(r)).abs() < 1e-12);
            assert!((bubble_u(r) * z0_kernel(r) - z0_mode(r)).abs() < 1e-12);
        }
    }

    #[test]
    fn wronskian_is_one() {
        for &r in &[0.01, 0.3, 1.0, 2.5, 40.0] {
            let w = r * (z0_kernel(r) * z0_bar_prime(r) - z0_kernel_prime(r) * z0_bar(r));
            assert!((w - 1.0).abs() < 1e-12, "{r} {w}");
        }
    }

    #[test]
    fn cutoff_shape() {
        let c = Cutoff::Quintic;
        assert_eq!(c.value(1.0), 1.0);
        assert_eq!(c.value(2.0), 0.0);
        let h = 1e-6;
        for &s in &[1.2, 1.5, 1.9] {
            assert!(((c.value(s + h) - c.value(s - h)) / (2.0 * h) - c.d1(s)).abs() < 1e-7);
            assert!(((c.d1(s + h) - c.d1(s - h)) / (2.0 * h) - c.d2(s)).abs() < 1e-6);
        }
        assert_eq!(eta(-0.5), 0.0);
        assert_eq!(eta(0.0), 1.0);
    }

    #[test]
    fn star_integral_closed_form() {
        let x: f64 = 1e-5;
        let q = crate::quad::integrate(|u: f64| p_star_gap((-u).exp()) * (-u).exp(), -x.ln(), -x.ln() + 80.0, &Default::default()).unwrap();
        assert!((q.value / p_star_integral_gap(x) - 1.0).abs() < 1e-10);
    }
}
