use std::ops::{Add, Mul, Neg, Sub};

use rustfft::num_complex::Complex64;

use super::grid::PeriodicGrid;
use crate::error::SpectralError;

/// Grid samples of a real periodic function on the unit torus.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &PeriodicGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "sample count must be n²");
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &PeriodicGrid, c: f64) -> Self {
        Self::new(grid, vec![c; grid.len()])
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                let (x, y) = grid.node(i, j);
                values.push(f(x, y));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
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

    pub fn spectrum(&self) -> Spectrum {
        Spectrum {
            grid: self.grid.clone(),
            coeffs: self.grid.forward(&self.values),
        }
    }

    /// Integral over the unit cell by the trapezoidal (grid) rule.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Discrete L² inner product `(1/n²) Σ f g`.
    pub fn inner(&self, other: &ScalarField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / self.values.len() as f64
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField::new(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        debug_assert_eq!(self.grid, other.grid);
        ScalarField::new(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Pointwise product on the grid (no dealiasing).
    pub fn pointwise(&self, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        self.map(|v| c * v)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &ScalarField) -> ScalarField {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn add_constant(&self, c: f64) -> ScalarField {
        self.map(|v| v + c)
    }

    pub fn check_grid(&self, other: &ScalarField) -> Result<(), SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch(self.grid.n(), other.grid.n()));
        }
        Ok(())
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, c: f64) -> ScalarField {
        self.scale(c)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

/// Fourier coefficients of a grid field, normalised so that `f = Σ f̂_k e^{2πik·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: PeriodicGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: &PeriodicGrid, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.len());
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self::new(grid, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn to_field(&self) -> ScalarField {
        ScalarField::new(&self.grid, self.grid.inverse(&self.coeffs))
    }

    /// The `k = 0` coefficient, i.e. the mean.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Multiplies bin `(a, b)` by `m(a, b)`.
    pub fn apply(&self, m: impl Fn(usize, usize) -> Complex64) -> Spectrum {
        let n = self.grid.n();
        let mut out = self.coeffs.clone();
        for a in 0..n {
            for b in 0..n {
                out[a * n + b] *= m(a, b);
            }
        }
        Spectrum::new(&self.grid, out)
    }

    pub fn apply_real(&self, m: impl Fn(usize, usize) -> f64) -> Spectrum {
        self.apply(|a, b| Complex64::new(m(a, b), 0.0))
    }

    pub fn add(&self, other: &Spectrum) -> Spectrum {
        Spectrum::new(
            &self.grid,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Spectrum) -> Spectrum {
        Spectrum::new(
            &self.grid,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Spectrum {
        Spectrum::new(&self.grid, self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Sum of `w(k) |f̂_k|²` over every resolved bin.
    pub fn weighted_energy(&self, w: impl Fn(usize, usize) -> f64) -> f64 {
        let n = self.grid.n();
        let mut sum = 0.0;
        for a in 0..n {
            for b in 0..n {
                sum += w(a, b) * self.coeffs[a * n + b].norm_sqr();
            }
        }
        sum
    }
}

/// A pair of scalar fields `(v¹, v²)` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField) -> Self {
        assert_eq!(x.grid(), y.grid(), "vector components must share one grid");
        Self { x, y }
    }

    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self::new(ScalarField::zeros(grid), ScalarField::zeros(grid))
    }

    pub fn constant(grid: &PeriodicGrid, c: [f64; 2]) -> Self {
        Self::new(
            ScalarField::constant(grid, c[0]),
            ScalarField::constant(grid, c[1]),
        )
    }

    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        Self::new(
            ScalarField::from_fn(grid, |x, y| f(x, y)[0]),
            ScalarField::from_fn(grid, |x, y| f(x, y)[1]),
        )
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.x.grid()
    }

    pub fn mean(&self) -> [f64; 2] {
        [self.x.mean(), self.y.mean()]
    }

    pub fn inner(&self, other: &VectorField) -> f64 {
        self.x.inner(&other.x) + self.y.inner(&other.y)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scale(&self, c: f64) -> VectorField {
        VectorField::new(self.x.scale(c), self.y.scale(c))
    }

    pub fn axpy(&self, c: f64, other: &VectorField) -> VectorField {
        VectorField::new(self.x.axpy(c, &other.x), self.y.axpy(c, &other.y))
    }

    pub fn add_constant(&self, c: [f64; 2]) -> VectorField {
        VectorField::new(self.x.add_constant(c[0]), self.y.add_constant(c[1]))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Pointwise `|v|²`.
    pub fn norm_sqr_field(&self) -> ScalarField {
        self.x.zip_map(&self.y, |a, b| a * a + b * b)
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField::new(&self.x + &rhs.x, &self.y + &rhs.y)
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField::new(&self.x - &rhs.x, &self.y - &rhs.y)
    }
}
