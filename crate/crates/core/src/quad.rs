//! Adaptive Gauss–Kronrod quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_996,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Panel rule used by the adaptive driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    GaussKronrod21,
}

/// Tolerances and limits for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub scheme: Scheme,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-10, max_subdivisions: 2000, scheme: Scheme::GaussKronrod21 }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        crate::error::check(abs_tol > 0.0, "abs_tol", abs_tol, "> 0")?;
        crate::error::check(rel_tol > 0.0, "rel_tol", rel_tol, "> 0")?;
        crate::error::check(max_subdivisions >= 1, "max_subdivisions", max_subdivisions as f64, ">= 1")?;
        Ok(Self { abs_tol, rel_tol, max_subdivisions, scheme: Scheme::GaussKronrod21 })
    }

    pub fn with_rel(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn with_abs(self, abs_tol: f64) -> Self {
        Self { abs_tol, ..self }
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

/// One G10K21 panel: (integral, error estimate).
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv = [(0.0, 0.0); 10];
    for (j, x) in XGK[..10].iter().enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        fv[j] = (f1, f2);
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        resasc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let result = resk * h;
    let resasc = resasc * h.abs();
    let resabs = resabs * h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Adaptive integration over [a, b]; returns an error if the tolerance is not met.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    integrate_breaks(f, &[a, b], spec)
}

/// Adaptive integration over consecutive intervals of `points` (sorted either way).
pub fn integrate_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], spec: &QuadratureSpec) -> Result<QuadResult> {
    let r = integrate_best(&f, points, spec);
    let tol = spec.abs_tol.max(spec.rel_tol * r.value.abs());
    if !r.value.is_finite() {
        return Err(Error::NonFinite("quadrature"));
    }
    if r.error <= tol {
        Ok(r)
    } else {
        Err(Error::Quadrature { estimate: r.error, requested: tol })
    }
}

/// Like [`integrate_breaks`] but always returns the best estimate reached.
pub fn integrate_best<F: Fn(f64) -> f64>(f: &F, points: &[f64], spec: &QuadratureSpec) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut frozen = QuadResult { value: 0.0, error: 0.0 };
    let mut total = 0.0;
    let mut err = 0.0;
    for w in points.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (v, e) = gk21(f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    let mut n = heap.len();
    while n < spec.max_subdivisions {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if err <= tol {
            break;
        }
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if (p.b - p.a).abs() <= 4.0 * f64::EPSILON * p.a.abs().max(p.b.abs()).max(f64::MIN_POSITIVE) || m == p.a || m == p.b {
            frozen.value += p.value;
            frozen.error += p.error;
            continue;
        }
        let (v1, e1) = gk21(f, p.a, m);
        let (v2, e2) = gk21(f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2 });
        n += 1;
    }
    // re-sum to limit drift from incremental updates
    let value = heap.iter().map(|p| p.value).sum::<f64>() + frozen.value;
    let error = heap.iter().map(|p| p.error).sum::<f64>() + frozen.error;
    QuadResult { value, error }
}

/// Composite fixed-order rule, for smooth integrands inside hot loops.
pub fn fixed_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|i| gk21(f, a + i as f64 * h, a + (i + 1) as f64 * h).0).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, &QuadratureSpec::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn breaks_and_reverse() {
        let s = QuadratureSpec::default();
        let f = |x: f64| (x - 0.3).abs();
        let r = integrate_breaks(f, &[0.0, 0.3, 1.0], &s).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
        let r2 = integrate(f, 1.0, 0.0, &s.with_rel(1e-12)).unwrap();
        assert!((r2.value + 0.29).abs() < 1e-10);
    }

    #[test]
    fn reports_failure() {
        let s = QuadratureSpec::new(1e-300, 1e-15, 3).unwrap();
        assert!(matches!(integrate(|x: f64| x.sin().abs() * 1e3, 0.0, 100.0, &s), Err(Error::Quadrature { .. })));
    }
}
