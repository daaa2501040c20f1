//! Radial linearized operator L[φ] = ∇·(U∇(φ/U − ψ)), ψ = (−Δ)⁻¹φ, and its inverse.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::RadialField;
use crate::profiles::{bubble_u, gamma0, z0_bar, z0_kernel, z0_mode};

/// ∫_a^b v(s)s ds for v linear between (a, va) and (b, vb).
fn seg_moment(a: f64, b: f64, va: f64, vb: f64) -> f64 {
    (b - a) * (va * (2.0 * a + b) + vb * (a + 2.0 * b)) / 6.0
}

/// Cumulative ∫₀^{ρᵢ} v s ds at the nodes.
pub(crate) fn cumulative_moment(r: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(r.len());
    let mut acc = 0.5 * v[0] * r[0] * r[0];
    out.push(acc);
    for i in 0..r.len() - 1 {
        acc += seg_moment(r[i], r[i + 1], v[i], v[i + 1]);
        out.push(acc);
    }
    out
}

/// Cumulative ∫₀^{ρ_{i+½}} v s ds at the midpoints between nodes.
fn face_moment(r: &[f64], v: &[f64], nodes: &[f64]) -> Vec<f64> {
    (0..r.len() - 1)
        .map(|i| {
            let m = 0.5 * (r[i] + r[i + 1]);
            nodes[i] + seg_moment(r[i], m, v[i], 0.5 * (v[i] + v[i + 1]))
        })
        .collect()
}

/// ∂ρψ with ψ = (−Δ)⁻¹φ: −(1/ρ)∫₀^ρ φ s ds, zero at ρ = 0.
pub fn inv_laplacian_gradient(phi: &RadialField) -> RadialField {
    let r = phi.radii();
    let cum = cumulative_moment(r, phi.values());
    let values = r.iter().zip(&cum).map(|(&ri, &c)| if ri > 0.0 { -c / ri } else { 0.0 }).collect();
    RadialField::new(phi.grid().clone(), values).expect("same grid")
}

/// Flux-form discretization of L on the grid of φ.
pub fn apply_l(phi: &RadialField) -> Result<RadialField> {
    let r = phi.radii();
    let n = r.len();
    if n < 16 {
        return Err(Error::Grid(format!("apply_L needs at least 16 nodes, got {n}")));
    }
    let v = phi.values();
    let m: Vec<f64> = r.iter().zip(v).map(|(&ri, &vi)| vi / bubble_u(ri)).collect();
    let cum = cumulative_moment(r, v);
    let fm = face_moment(r, v, &cum);
    let flux: Vec<f64> = (0..n - 1)
        .map(|i| {
            let rf = 0.5 * (r[i] + r[i + 1]);
            let dpsi = -fm[i] / rf;
            let dg = (m[i + 1] - m[i]) / (r[i + 1] - r[i]) - dpsi;
            rf * bubble_u(rf) * dg
        })
        .collect();
    let out = (0..n)
        .map(|i| {
            let left_r = if i == 0 { 0.0 } else { 0.5 * (r[i - 1] + r[i]) };
            let right_r = if i + 1 < n { 0.5 * (r[i] + r[i + 1]) } else { r[i] };
            let fl = if i == 0 { 0.0 } else { flux[i - 1] };
            let fr = if i + 1 < n { flux[i] } else { 0.0 };
            let vol = 0.5 * (right_r * right_r - left_r * left_r);
            (fr - fl) / vol
        })
        .collect();
    RadialField::new(phi.grid().clone(), out)
}

/// g = φ/U − ψ with ψ normalized to vanish at infinity.
///
/// The tail ∫_R^∞ ∂ρψ is extrapolated from a power law fitted to the last two nodes.
pub fn g_of(phi: &RadialField) -> RadialField {
    let r = phi.radii();
    let n = r.len();
    let dpsi = inv_laplacian_gradient(phi);
    let d = dpsi.values();
    let k = if d[n - 1] != 0.0 && d[n - 2] != 0.0 && d[n - 1].signum() == d[n - 2].signum() {
        ((d[n - 2] / d[n - 1]).ln() / (r[n - 1] / r[n - 2]).ln()).max(2.0)
    } else {
        2.0
    };
    let mut psi = vec![0.0; n];
    psi[n - 1] = d[n - 1] * r[n - 1] / (k - 1.0);
    for i in (0..n - 1).rev() {
        psi[i] = psi[i + 1] - 0.5 * (d[i] + d[i + 1]) * (r[i + 1] - r[i]);
    }
    let values = (0..n).map(|i| phi.values()[i] / bubble_u(r[i]) - psi[i]).collect();
    RadialField::new(phi.grid().clone(), values).expect("same grid")
}

/// Kernel/orthogonal splitting φ = φ⊥ + (a/2)Z₀.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub a: f64,
    pub phi_perp: RadialField,
    pub g_perp: RadialField,
}

/// Relative mass tolerance accepted as "zero mass".
pub const MASS_TOL: f64 = 1e-6;

fn abs_integral(f: &RadialField, weight: impl Fn(f64) -> f64) -> f64 {
    f.values().iter().zip(f.radii().iter().zip(f.grid().weights())).map(|(v, (&r, w))| v.abs() * weight(r) * w).sum()
}

pub fn decompose(phi: &RadialField) -> Result<Decomposition> {
    let mass = phi.integral();
    let scale = abs_integral(phi, |_| 1.0);
    if mass.abs() > MASS_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition { what: "zero mass of phi", measured: mass });
    }
    let a = phi.integral_with(gamma0) / (8.0 * PI);
    let phi_perp = phi.map(|r, v| v - 0.5 * a * z0_mode(r));
    let g_perp = g_of(phi).map(|_, v| v + a);
    Ok(Decomposition { a, phi_perp, g_perp })
}

/// Weights (wa, wb) with ∫_a^b f k(s) s ds = wa f(a) + wb f(b) for f linear on [a, b].
fn cell_weights(a: f64, b: f64, k: fn(f64) -> f64) -> Result<[f64; 2]> {
    let spec = crate::quad::QuadratureSpec::default().with_abs(1e-300);
    let h = b - a;
    let wb = crate::quad::integrate(|s: f64| k(s) * s * (s - a) / h, a, b, &spec)?.value;
    let wa = crate::quad::integrate(|s: f64| k(s) * s * (b - s) / h, a, b, &spec)?.value;
    Ok([wa, wb])
}

/// Solves L[φ] = h for radial zero-mass h by integrating the flux and then
/// variation of parameters for −Δψ − Uψ = Ug with the pair z₀, z̄₀.
pub fn solve_l(h: &RadialField, enforce_moments: bool) -> Result<RadialField> {
    let r = h.radii();
    let n = r.len();
    let hv = h.values();
    let mass = h.integral();
    let scale = abs_integral(h, |_| 1.0);
    if mass.abs() > MASS_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition { what: "zero mass of h", measured: mass });
    }
    if enforce_moments {
        let m2 = h.integral_with(|r| r * r);
        let s2 = abs_integral(h, |r| r * r);
        if m2.abs() > MASS_TOL * s2.max(f64::MIN_POSITIVE) {
            return Err(Error::Precondition { what: "zero second moment of h", measured: m2 });
        }
    }
    let flux = cumulative_moment(r, hv);
    let dg: Vec<f64> = (0..n).map(|i| if r[i] > 0.0 { flux[i] / (r[i] * bubble_u(r[i])) } else { 0.0 }).collect();
    let mut g = vec![0.0; n];
    for i in (0..n - 1).rev() {
        g[i] = g[i + 1] - 0.5 * (dg[i] + dg[i + 1]) * (r[i + 1] - r[i]);
    }
    let f: Vec<f64> = (0..n).map(|i| bubble_u(r[i]) * g[i]).collect();
    // inner: ∫₀^ρ f z₀ s ds ; outer: ∫_ρ^R f z̄₀ s ds, f linear on each cell
    let mut inner = vec![0.0; n];
    let mut outer = vec![0.0; n];
    let cells: Vec<([f64; 2], [f64; 2])> = (0..n - 1).map(|i| Ok((cell_weights(r[i], r[i + 1], z0_kernel)?, cell_weights(r[i], r[i + 1], z0_bar)?))).collect::<Result<_>>()?;
    for i in 1..n {
        let w = cells[i - 1].0;
        inner[i] = inner[i - 1] + w[0] * f[i - 1] + w[1] * f[i];
    }
    for i in (0..n - 1).rev() {
        let w = cells[i].1;
        outer[i] = outer[i + 1] + w[0] * f[i] + w[1] * f[i + 1];
    }
    let values = (0..n)
        .map(|i| {
            let zb = if r[i] > 0.0 { z0_bar(r[i]) * inner[i] } else { 0.0 };
            let psi = -z0_kernel(r[i]) * outer[i] - zb;
            f[i] + bubble_u(r[i]) * psi
        })
        .collect();
    RadialField::new(h.grid().clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use std::sync::Arc;

    #[test]
    fn gradient_of_bubble() {
        let g = Arc::new(RadialGrid::sinh(0.05, 30.0, 2000).unwrap());
        let f = RadialField::from_fn(g, bubble_u);
        let d = inv_laplacian_gradient(&f);
        for (&r, &v) in d.radii().iter().zip(d.values()) {
            assert!((v + 4.0 * r / (1.0 + r * r)).abs() < 1e-4);
        }
    }

    #[test]
    fn short_grid_rejected() {
        let g = Arc::new(RadialGrid::uniform(1.0, 10).unwrap());
        assert!(apply_l(&RadialField::zeros(g)).is_err());
    }
}
