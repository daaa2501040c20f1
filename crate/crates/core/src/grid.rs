//! Radial grids and sampled radial fields.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Strictly increasing radii with 2D-measure weights.
///
/// The weights integrate the piecewise-linear interpolant against 2πr dr,
/// extended as a constant over [0, r₀] when the first radius is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    radii: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn from_radii(radii: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 {
            return Err(Error::Grid("need at least two radii".into()));
        }
        if radii[0] < 0.0 || radii.iter().any(|r| !r.is_finite()) {
            return Err(Error::Grid("radii must be finite and non-negative".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("radii must be strictly increasing".into()));
        }
        let n = radii.len();
        let mut weights = vec![0.0; n];
        for (i, w) in radii.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let h = b - a;
            // ∫ hat·2πr over [a,b] for the left and right hats
            weights[i] += 2.0 * PI * h * (2.0 * a + b) / 6.0;
            weights[i + 1] += 2.0 * PI * h * (a + 2.0 * b) / 6.0;
        }
        weights[0] += PI * radii[0] * radii[0];
        let g = Self { radii, weights };
        let r = g.outer();
        let area = g.weights.iter().sum::<f64>();
        if ((area - PI * r * r) / (PI * r * r)).abs() > 1e-10 {
            return Err(Error::Grid(format!("weight sum {area} differs from disk area")));
        }
        Ok(g)
    }

    /// r = 0 followed by n−1 geometric radii from `r_min` to `r_max`.
    pub fn geometric(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && n >= 3) {
            return Err(Error::Grid(format!("geometric({r_min}, {r_max}, {n}) invalid")));
        }
        let q = (r_max / r_min).ln() / (n - 2) as f64;
        let mut radii = vec![0.0];
        radii.extend((0..n - 1).map(|i| r_min * (q * i as f64).exp()));
        Self::from_radii(radii)
    }

    /// Default grid for a core of scale λ: smallest cell λ/8 near the origin.
    pub fn for_scale(lambda: f64, r_max: f64, n: usize) -> Result<Self> {
        Self::geometric(lambda / 8.0, r_max, n)
    }

    /// Smoothly stretched radii r = c·sinh(x·asinh(R/c)), x uniform on [0,1].
    pub fn sinh(core: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(core > 0.0 && r_max > 0.0 && n >= 3) {
            return Err(Error::Grid(format!("sinh({core}, {r_max}, {n}) invalid")));
        }
        let s = (r_max / core).asinh();
        let radii = (0..n).map(|i| core * (s * i as f64 / (n - 1) as f64).sinh()).collect();
        Self::from_radii(radii)
    }

    pub fn uniform(r_max: f64, n: usize) -> Result<Self> {
        Self::from_radii((0..n).map(|i| r_max * i as f64 / (n - 1) as f64).collect())
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn outer(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }

    /// Largest spacing between consecutive radii.
    pub fn max_spacing(&self) -> f64 {
        self.radii.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// A radial function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!("{} values for {} radii", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("radial field"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.radii().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn radii(&self) -> &[f64] {
        self.grid.radii()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// ∫ f dx over the disk of the grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(v, w)| v * w).sum()
    }

    /// ∫ f·g dx.
    pub fn integral_with(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .zip(self.grid.radii().iter().zip(self.grid.weights()))
            .map(|(v, (&r, w))| v * g(r) * w)
            .sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.radii().iter().zip(&self.values).map(|(&r, &v)| f(r, v)).collect();
        Self { grid: self.grid.clone(), values }
    }

    /// Linear combination α·self + β·other on the same grid.
    pub fn axpby(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        debug_assert!(Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| alpha * a + beta * b).collect();
        Self { grid: self.grid.clone(), values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_exact() {
        for g in [
            RadialGrid::geometric(1e-3, 30.0, 300).unwrap(),
            RadialGrid::sinh(0.1, 30.0, 257).unwrap(),
            RadialGrid::from_radii(vec![0.5, 0.7, 2.0]).unwrap(),
        ] {
            let r = g.outer();
            assert!((g.weights().iter().sum::<f64>() / (PI * r * r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unsorted() {
        assert!(RadialGrid::from_radii(vec![0.0, 2.0, 1.0]).is_err());
        assert!(RadialGrid::from_radii(vec![0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn field_length_checked() {
        let g = Arc::new(RadialGrid::uniform(1.0, 5).unwrap());
        assert!(RadialField::new(g.clone(), vec![0.0; 4]).is_err());
        assert!(RadialField::new(g, vec![f64::NAN; 5]).is_err());
    }
}
