//! Exponential integral and the closed-form integrals of the mass expansion.

use crate::error::{check, Result};
use crate::profiles::{bubble_u, z0_mode, Cutoff, EULER_GAMMA};
use crate::quad::{integrate_breaks, QuadratureSpec};

/// Ei(x) for x < 0: power series for |x| ≤ 5, Lentz continued fraction beyond.
pub fn expint_ei(x: f64) -> Result<f64> {
    check(x < 0.0, "x", x, "< 0")?;
    let y = -x;
    if y <= 5.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..200 {
            term *= -y / k as f64;
            let c = term / k as f64;
            sum += c;
            if c.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        Ok(EULER_GAMMA + y.ln() + sum)
    } else {
        let tiny = 1e-300;
        let mut b = y + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(-h * (-y).exp())
    }
}

/// Closed form −(2/a⁴)[Ei(−1/(4a²)) + 1] of the Gaussian-weighted Z₀ integral.
pub fn gaussian_z0_closed(a: f64) -> Result<f64> {
    check(a > 1.0, "a", a, "> 1")?;
    Ok(-2.0 / a.powi(4) * (expint_ei(-1.0 / (4.0 * a * a))? + 1.0))
}

/// ∫₀^∞ e^{−u²/4} Z₀(ua) u du by adaptive quadrature.
///
/// Uses ∫₀^L Z₀(ua)u du = L²U(La) to integrate only (e^{−u²/4} − 1)Z₀(ua)u.
pub fn gaussian_z0_integral(a: f64, spec: &QuadratureSpec) -> Result<f64> {
    check(a > 1.0, "a", a, "> 1")?;
    let cut = 2.0 * (1e2 / spec.abs_tol).ln().max(1.0).sqrt();
    let mut pts = vec![0.0];
    let mut p = 1.0 / a;
    while p < 1.0 {
        pts.push(p);
        p *= 4.0;
    }
    pts.extend([1.0, 4.0, cut.max(5.0)]);
    let f = |u: f64| (-0.25 * u * u).exp_m1() * z0_mode(u * a) * u;
    let r = integrate_breaks(f, &pts, spec)?;
    let l = cut.max(5.0);
    Ok(r.value + l * l * bubble_u(l * a))
}

/// ∫₀^{z₁} z³Z₀(z) dz from the primitive P(z) = −8[(2+3z²)/(1+z²)² + ln(1+z²)].
pub fn cubic_moment_z0(z1: f64) -> Result<f64> {
    check(z1 >= 0.0, "z1", z1, ">= 0")?;
    let prim = |z: f64| {
        let q = 1.0 + z * z;
        -8.0 * ((2.0 + 3.0 * z * z) / (q * q) + (z * z).ln_1p())
    };
    Ok(prim(z1) - prim(0.0))
}

/// (1/w⁴)[1 − e^{−w²/4}(1 + w²/4)], Taylor branch near the removable singularity.
pub fn heat6_factor(w: f64) -> f64 {
    let x = 0.25 * w * w;
    if w < 1.5 {
        // (1/16) Σ_{n≥2} (−1)ⁿ (n−1) x^{n−2}/n!
        let mut fact = 2.0;
        let mut pow = 1.0;
        let mut sum = 0.5;
        for n in 3..40 {
            fact *= n as f64;
            pow *= -x;
            let t = (n - 1) as f64 * pow / fact;
            sum += t;
            if t.abs() < 1e-18 {
                break;
            }
        }
        sum / 16.0
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (w * w * w * w)
    }
}

/// β = ∫₀^∞ (1 − χ₀(s))/s³ ds.
pub fn beta_const(cutoff: Cutoff, spec: &QuadratureSpec) -> Result<f64> {
    let r = integrate_breaks(|s: f64| (1.0 - cutoff.value(s)) / (s * s * s), &[1.0, 1.5, 2.0], spec)?;
    Ok(r.value + 0.125)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ei_branches_agree() {
        // both branches near the split against an oracle value
        let e5 = -1.148_295_591_275_325_7e-3;
        assert!((expint_ei(-5.0).unwrap() / e5 - 1.0).abs() < 1e-12);
        let e6 = -3.600_824_521_626_587e-4;
        assert!((expint_ei(-6.0).unwrap() / e6 - 1.0).abs() < 1e-12);
        assert!(expint_ei(0.0).is_err());
    }

    #[test]
    fn heat6_continuous_at_branch() {
        let a = heat6_factor(1.5 - 1e-12);
        let b = heat6_factor(1.5 + 1e-12);
        assert!((a - b).abs() < 1e-13);
    }
}
