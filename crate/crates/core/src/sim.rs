//! Radial finite-volume simulator for u_t = Δu − ∇·(u∇v), v = (−Δ)⁻¹u.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{check, Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::profiles::{bubble_u, Cutoff};
use crate::tridiag;

/// Simulation parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    /// Total mass in units of 8π.
    pub mass_multiplier: f64,
    pub lambda0: f64,
    pub radius: f64,
    pub cells: usize,
    /// Stretching scale of the sinh grid; the innermost cell is about core·asinh(R/core)/cells.
    pub core: f64,
    pub cfl: f64,
    /// Accuracy cap dt ≤ peak_dt / u_peak.
    pub peak_dt: f64,
    pub dt_max: f64,
    pub min_dt: f64,
    pub max_t: f64,
    /// Blow-up status once u_peak exceeds this multiple of its initial value.
    pub peak_growth: f64,
    /// Blow-up status once λ_eff drops below this many innermost cells.
    pub min_cells_per_lambda: f64,
    /// Record a sample whenever u_peak changed by this factor or `sample_dt` elapsed.
    pub sample_ratio: f64,
    pub sample_dt: f64,
    pub muscl: bool,
    pub chemotaxis: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            mass_multiplier: 1.0,
            lambda0: 1.0,
            radius: 40.0,
            cells: 1024,
            core: 0.1,
            cfl: 0.4,
            peak_dt: 0.02,
            dt_max: 1e-2,
            min_dt: 1e-14,
            max_t: 1.0,
            peak_growth: 1e5,
            min_cells_per_lambda: 8.0,
            sample_ratio: 1.02,
            sample_dt: 0.01,
            muscl: false,
            chemotaxis: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Every violated constraint, in field order.
    pub fn violations(&self) -> Vec<Error> {
        [
            check(self.mass_multiplier > 0.0, "mass_multiplier", self.mass_multiplier, "> 0"),
            check(self.lambda0 > 0.0, "lambda0", self.lambda0, "> 0"),
            check(self.radius >= 20.0 * self.lambda0, "radius", self.radius, ">= 20 lambda0"),
            check(self.cells >= 256, "cells", self.cells as f64, ">= 256"),
            check(self.core > 0.0, "core", self.core, "> 0"),
            check(self.cfl > 0.0 && self.cfl <= 1.0, "cfl", self.cfl, "in (0, 1]"),
            check(self.peak_dt > 0.0, "peak_dt", self.peak_dt, "> 0"),
            check(self.dt_max > 0.0, "dt_max", self.dt_max, "> 0"),
            check(self.min_dt > 0.0, "min_dt", self.min_dt, "> 0"),
            check(self.max_t > 0.0, "max_t", self.max_t, "> 0"),
            check(self.peak_growth > 1.0, "peak_growth", self.peak_growth, "> 1"),
            check(self.sample_ratio > 1.0, "sample_ratio", self.sample_ratio, "> 1"),
            check(self.sample_dt > 0.0, "sample_dt", self.sample_dt, "> 0"),
        ]
        .into_iter()
        .filter_map(|r| r.err())
        .collect()
    }

    pub fn mass(&self) -> f64 {
        8.0 * PI * self.mass_multiplier
    }
}

/// Finite-volume geometry: faces f₀ = 0 < … < f_N = R.
#[derive(Debug, Clone)]
pub struct Mesh {
    faces: Vec<f64>,
    centers: Vec<f64>,
    vol: Vec<f64>,
    // dual distances at interior faces chosen so the discrete Laplacian moves m₂ exactly by 4M dt
    dual: Vec<f64>,
    // ∫ r³ dr / ∫ r dr over each cell
    q: Vec<f64>,
}

impl Mesh {
    pub fn sinh(core: f64, radius: f64, cells: usize) -> Self {
        let s = (radius / core).asinh();
        let faces: Vec<f64> = (0..=cells).map(|j| core * (s * j as f64 / cells as f64).sinh()).collect();
        Self::from_faces(faces)
    }

    pub fn from_faces(faces: Vec<f64>) -> Self {
        let n = faces.len() - 1;
        let centers = (0..n).map(|i| 0.5 * (faces[i] + faces[i + 1])).collect();
        let vol = (0..n).map(|i| 0.5 * (faces[i + 1] * faces[i + 1] - faces[i] * faces[i])).collect();
        let dual = (0..=n)
            .map(|j| if j == 0 || j == n { 0.0 } else { (faces[j + 1] * faces[j + 1] - faces[j - 1] * faces[j - 1]) / (4.0 * faces[j]) })
            .collect();
        let q = (0..n).map(|i| 0.5 * (faces[i] * faces[i] + faces[i + 1] * faces[i + 1])).collect();
        Self { faces, centers, vol, dual, q }
    }

    pub fn cells(&self) -> usize {
        self.vol.len()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn innermost(&self) -> f64 {
        self.faces[1]
    }

    pub fn mass(&self, u: &[f64]) -> f64 {
        2.0 * PI * u.iter().zip(&self.vol).map(|(a, v)| a * v).sum::<f64>()
    }

    pub fn second_moment(&self, u: &[f64]) -> f64 {
        2.0 * PI * u.iter().zip(self.vol.iter().zip(&self.q)).map(|(a, (v, q))| a * v * q).sum::<f64>()
    }

    /// Grid of cell centers with r = 0 prepended, for use with [`RadialField`].
    pub fn center_grid(&self) -> Result<RadialGrid> {
        RadialGrid::from_radii(self.centers.clone())
    }
}

/// PDE state with cached diagnostics.
#[derive(Debug, Clone)]
pub struct SimState {
    pub u: Vec<f64>,
    pub t: f64,
    pub mass: f64,
    pub m2: f64,
    pub u_peak: f64,
    pub lambda_eff: f64,
}

impl SimState {
    fn from_u(mesh: &Mesh, u: Vec<f64>, t: f64) -> Self {
        let mass = mesh.mass(&u);
        let m2 = mesh.second_moment(&u);
        let u_peak = u[0];
        Self { u, t, mass, m2, u_peak, lambda_eff: (8.0 / u_peak).sqrt() }
    }

    pub fn field(&self, mesh: &Mesh) -> Result<RadialField> {
        RadialField::new(Arc::new(mesh.center_grid()?), self.u.clone())
    }
}

/// Bubble initial datum u = (m/8π)λ₀⁻²U(r/λ₀)χ₀(4r/R), rescaled to mass m exactly.
pub fn init_bubble(cfg: &SimConfig) -> Result<(Mesh, SimState)> {
    cfg.validate()?;
    let mesh = Mesh::sinh(cfg.core, cfg.radius, cfg.cells);
    let l = cfg.lambda0;
    let chi = Cutoff::Quintic;
    // exact cell averages of the unnormalized profile would need quadrature; midpoint-in-r² is enough before rescaling
    let u: Vec<f64> = (0..mesh.cells())
        .map(|i| {
            let (a, b) = (mesh.faces[i], mesh.faces[i + 1]);
            let rm = (0.5 * (a * a + b * b)).sqrt();
            // U/λ² integrates exactly over the cell: ∫U(r/λ)r dr/λ² = 4ρ²/(1+ρ²)
            let prim = |r: f64| {
                let p = (r / l) * (r / l);
                4.0 * p / (1.0 + p)
            };
            (prim(b) - prim(a)) / mesh.vol[i] * chi.value(4.0 * rm / cfg.radius)
        })
        .collect();
    let m0 = mesh.mass(&u);
    if m0 <= 0.0 {
        return Err(Error::Domain { name: "radius", value: cfg.radius, constraint: "bubble must fit in the domain" });
    }
    let s = cfg.mass() / m0;
    let u = u.into_iter().map(|v| v * s).collect();
    let st = SimState::from_u(&mesh, u, 0.0);
    Ok((mesh, st))
}

/// v_r at cell faces: −m(r)/(2πr), with m the exact discrete enclosed mass.
pub fn chemical_gradient_faces(mesh: &Mesh, u: &[f64]) -> Vec<f64> {
    let n = mesh.cells();
    let mut out = vec![0.0; n + 1];
    let mut m = 0.0;
    for j in 1..=n {
        m += u[j - 1] * mesh.vol[j - 1];
        out[j] = -m / mesh.faces[j];
    }
    out
}

/// v_r = −(1/r)∫₀^r u s ds on the nodes of a radial field.
pub fn chemical_gradient(u: &RadialField) -> RadialField {
    crate::linop::inv_laplacian_gradient(u)
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Stepping engine for one mesh.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub mesh: Mesh,
    pub muscl: bool,
    pub chemotaxis: bool,
}

impl Stepper {
    pub fn new(mesh: Mesh, cfg: &SimConfig) -> Self {
        Self { mesh, muscl: cfg.muscl, chemotaxis: cfg.chemotaxis }
    }

    /// Face advective fluxes r·u·v_r and the largest stable dt.
    fn advection(&self, u: &[f64]) -> (Vec<f64>, f64) {
        let n = self.mesh.cells();
        let mut flux = vec![0.0; n + 1];
        if !self.chemotaxis {
            return (flux, f64::INFINITY);
        }
        let vr = chemical_gradient_faces(&self.mesh, u);
        let c = &self.mesh.centers;
        let slope = |i: usize| -> f64 {
            if !self.muscl || i == 0 || i + 1 >= n {
                0.0
            } else {
                minmod((u[i] - u[i - 1]) / (c[i] - c[i - 1]), (u[i + 1] - u[i]) / (c[i + 1] - c[i]))
            }
        };
        let mut out_rate = vec![0.0; n];
        for j in 1..n {
            let v = vr[j];
            let f = self.mesh.faces[j];
            let up = if v > 0.0 {
                u[j - 1] + slope(j - 1) * (f - c[j - 1])
            } else {
                u[j] + slope(j) * (f - c[j])
            };
            flux[j] = f * v * up;
            let donor = if v > 0.0 { j - 1 } else { j };
            out_rate[donor] += f * v.abs();
        }
        let factor = if self.muscl { 0.5 } else { 1.0 };
        let dt = (0..n).filter(|&i| out_rate[i] > 0.0).map(|i| factor * self.mesh.vol[i] / out_rate[i]).fold(f64::INFINITY, f64::min);
        (flux, dt)
    }

    /// Largest dt allowed by the explicit advection.
    pub fn cfl_dt(&self, u: &[f64]) -> f64 {
        self.advection(u).1
    }

    /// One IMEX step: explicit upwind advection, implicit diffusion.
    pub fn step(&self, st: &SimState, dt: f64) -> Result<SimState> {
        if dt.is_nan() || dt <= 0.0 {
            return Err(Error::StepRejected(format!("dt = {dt}")));
        }
        let n = self.mesh.cells();
        let (adv, dt_cfl) = self.advection(&st.u);
        if dt > dt_cfl {
            return Err(Error::StepRejected(format!("CFL: dt {dt:e} > {dt_cfl:e}")));
        }
        let m = &self.mesh;
        let rhs: Vec<f64> = (0..n).map(|i| st.u[i] * m.vol[i] - dt * (adv[i + 1] - adv[i])).collect();
        let mut a = vec![0.0; n];
        let mut b = m.vol.clone();
        let mut c = vec![0.0; n];
        for j in 1..n {
            let k = dt * m.faces[j] / m.dual[j];
            b[j - 1] += k;
            c[j - 1] -= k;
            b[j] += k;
            a[j] -= k;
        }
        let u = tridiag::solve(&a, &b, &c, &rhs)?;
        if u.iter().any(|v| *v < 0.0 || !v.is_finite()) {
            return Err(Error::StepRejected("negative density".into()));
        }
        Ok(SimState::from_u(m, u, st.t + dt))
    }
}

/// One diagnostic sample.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Sample {
    pub t: f64,
    pub mass: f64,
    pub m2: f64,
    pub u_peak: f64,
    pub lambda_eff: f64,
    /// u at the outer cell divided by u_peak.
    pub boundary_ratio: f64,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum RunStatus {
    MaxTime,
    BlowUp,
}

#[derive(Debug, Clone)]
pub struct RunSeries {
    pub samples: Vec<Sample>,
    pub status: RunStatus,
    pub final_state: SimState,
    pub steps: usize,
    pub innermost_cell: f64,
}

fn sample(st: &SimState) -> Sample {
    Sample {
        t: st.t,
        mass: st.mass,
        m2: st.m2,
        u_peak: st.u_peak,
        lambda_eff: st.lambda_eff,
        boundary_ratio: st.u[st.u.len() - 1] / st.u_peak,
    }
}

/// Runs from the bubble datum until max_t or blow-up status.
pub fn run(cfg: &SimConfig) -> Result<RunSeries> {
    let (mesh, st) = init_bubble(cfg)?;
    run_from(cfg, mesh, st)
}

pub fn run_from(cfg: &SimConfig, mesh: Mesh, mut st: SimState) -> Result<RunSeries> {
    let stepper = Stepper::new(mesh, cfg);
    let h_min = stepper.mesh.innermost();
    let peak0 = st.u_peak;
    let mut samples = vec![sample(&st)];
    let mut last = samples[0];
    let mut steps = 0usize;
    let status = loop {
        if st.t >= cfg.max_t {
            break RunStatus::MaxTime;
        }
        if st.u_peak > cfg.peak_growth * peak0 || st.lambda_eff < cfg.min_cells_per_lambda * h_min {
            break RunStatus::BlowUp;
        }
        let mut dt = cfg.dt_max.min(cfg.peak_dt / st.u_peak).min(cfg.max_t - st.t);
        dt = dt.min(cfg.cfl * stepper.cfl_dt(&st.u));
        let next = loop {
            if dt < cfg.min_dt {
                break None;
            }
            match stepper.step(&st, dt) {
                Ok(s) => break Some(s),
                Err(Error::StepRejected(_)) => dt *= 0.5,
                Err(e) => return Err(e),
            }
        };
        let Some(next) = next else { break RunStatus::BlowUp };
        st = next;
        steps += 1;
        let ratio = st.u_peak / last.u_peak;
        if ratio > cfg.sample_ratio || ratio < 1.0 / cfg.sample_ratio || st.t - last.t >= cfg.sample_dt {
            last = sample(&st);
            samples.push(last);
        }
    };
    if samples.last().map(|s| s.t) != Some(st.t) {
        samples.push(sample(&st));
    }
    Ok(RunSeries { samples, status, final_state: st, steps, innermost_cell: h_min })
}

/// Second-moment identity check.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct M2Report {
    pub slope: f64,
    pub expected: f64,
    /// |slope − expected| / |expected|, or / 4M when expected is zero.
    pub rel_discrepancy: f64,
    pub samples_used: usize,
}

/// Resolved window: samples with boundary density < 1e-10·u_peak.
pub fn resolved_window(series: &[Sample]) -> &[Sample] {
    let end = series.iter().position(|s| s.boundary_ratio >= 1e-10).unwrap_or(series.len());
    &series[..end]
}

/// Least-squares slope of m₂(t) against 4M − M²/(2π).
pub fn verify_m2_identity(series: &[Sample]) -> Result<M2Report> {
    let w = resolved_window(series);
    if w.len() < 10 {
        return Err(Error::Precondition { what: "samples in resolved window (need 10)", measured: w.len() as f64 });
    }
    let n = w.len() as f64;
    let tm = w.iter().map(|s| s.t).sum::<f64>() / n;
    let ym = w.iter().map(|s| s.m2).sum::<f64>() / n;
    let sxy: f64 = w.iter().map(|s| (s.t - tm) * (s.m2 - ym)).sum();
    let sxx: f64 = w.iter().map(|s| (s.t - tm) * (s.t - tm)).sum();
    let slope = sxy / sxx;
    let m = w[0].mass;
    let expected = 4.0 * m - m * m / (2.0 * PI);
    let denom = if expected.abs() < 1e-12 * m { 4.0 * m } else { expected.abs() };
    Ok(M2Report { slope, expected, rel_discrepancy: (slope - expected).abs() / denom, samples_used: w.len() })
}

/// Blow-up rate diagnostics.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RateReport {
    pub t_est: f64,
    pub exponent: f64,
    pub t: Vec<f64>,
    pub lambda_eff: Vec<f64>,
    pub q: Vec<f64>,
    /// Least-squares slope of ln q against ln(T_est − t); positive means q decreases toward T_est.
    pub q_trend: f64,
}

/// Residual of ln λ² = c + b ln(T − t) on the given samples.
fn power_fit(t: &[f64], l2: &[f64], tf: f64) -> (f64, f64) {
    let x: Vec<f64> = t.iter().map(|&ti| (tf - ti).ln()).collect();
    let y: Vec<f64> = l2.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xm) * (a - xm)).sum();
    let b = sxy / sxx;
    let res = x.iter().zip(&y).map(|(a, c)| (c - ym - b * (a - xm)).powi(2)).sum::<f64>();
    (res, b)
}

/// Fits T_est from u_peak growth and reports q = λ_eff²/(T_est − t).
///
/// T_est minimizes the residual of a local power law λ² ∝ (T − t)^b over the
/// final decade of u_peak growth.
pub fn extract_rate(series: &[Sample]) -> Result<RateReport> {
    if series.len() < 20 {
        return Err(Error::Precondition { what: "samples (need 20)", measured: series.len() as f64 });
    }
    let pmin = series.iter().map(|s| s.u_peak).fold(f64::INFINITY, f64::min);
    let last = series[series.len() - 1];
    if last.u_peak < 100.0 * pmin {
        return Err(Error::Precondition { what: "u_peak dynamic range (need 2 decades)", measured: last.u_peak / pmin });
    }
    let start = series.iter().rposition(|s| s.u_peak <= last.u_peak / 10.0).unwrap_or(0);
    let tail = &series[start..];
    if tail.len() < 5 {
        return Err(Error::Precondition { what: "samples in final decade (need 5)", measured: tail.len() as f64 });
    }
    let t: Vec<f64> = tail.iter().map(|s| s.t).collect();
    let l2: Vec<f64> = tail.iter().map(|s| s.lambda_eff * s.lambda_eff).collect();
    let t_last = last.t;
    let span = t_last - t[0];
    // golden-section search in ln(T − t_last) over [ln(span·1e-8), ln(span·10)]
    let obj = |z: f64| power_fit(&t, &l2, t_last + z.exp()).0;
    let (mut lo, mut hi) = ((span * 1e-8).ln(), (span * 10.0).ln());
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    // coarse scan guards against multiple local minima
    let mut best = (f64::INFINITY, lo);
    for k in 0..=200 {
        let z = lo + (hi - lo) * k as f64 / 200.0;
        let v = obj(z);
        if v < best.0 {
            best = (v, z);
        }
    }
    let dz = (hi - lo) / 200.0;
    lo = best.1 - dz;
    hi = best.1 + dz;
    let mut c = hi - gr * (hi - lo);
    let mut d = lo + gr * (hi - lo);
    for _ in 0..200 {
        if obj(c) < obj(d) {
            hi = d;
        } else {
            lo = c;
        }
        c = hi - gr * (hi - lo);
        d = lo + gr * (hi - lo);
    }
    let t_est = t_last + (0.5 * (lo + hi)).exp();
    let exponent = power_fit(&t, &l2, t_est).1;
    let q: Vec<f64> = t.iter().zip(&l2).map(|(&ti, &l)| l / (t_est - ti)).collect();
    let lx: Vec<f64> = t.iter().map(|&ti| (t_est - ti).ln()).collect();
    let lq: Vec<f64> = q.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let xm = lx.iter().sum::<f64>() / n;
    let ym = lq.iter().sum::<f64>() / n;
    let q_trend = lx.iter().zip(&lq).map(|(a, b)| (a - xm) * (b - ym)).sum::<f64>() / lx.iter().map(|a| (a - xm).powi(2)).sum::<f64>();
    Ok(RateReport { t_est, exponent, t, lambda_eff: tail.iter().map(|s| s.lambda_eff).collect(), q, q_trend })
}

/// Discrete bubble used by the steady-state check: U sampled as exact cell averages with mass 8π.
pub fn bubble_state(mesh: &Mesh) -> SimState {
    let u: Vec<f64> = (0..mesh.cells())
        .map(|i| {
            let (a, b) = (mesh.faces[i], mesh.faces[i + 1]);
            (4.0 * b * b / (1.0 + b * b) - 4.0 * a * a / (1.0 + a * a)) / mesh.vol[i]
        })
        .collect();
    SimState::from_u(mesh, u, 0.0)
}

/// Cell-center samples of U, for comparisons.
pub fn bubble_samples(mesh: &Mesh) -> Vec<f64> {
    mesh.centers.iter().map(|&r| bubble_u(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_mass_exact() {
        let cfg = SimConfig { mass_multiplier: 1.05, ..Default::default() };
        let (_, st) = init_bubble(&cfg).unwrap();
        assert!((st.mass / (1.05 * 8.0 * PI) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn small_domain_rejected() {
        let cfg = SimConfig { radius: 10.0, ..Default::default() };
        assert!(init_bubble(&cfg).is_err());
    }
}
