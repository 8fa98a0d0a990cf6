//! Differential calculus on the unit torus.
//!
//! Every operator acts diagonally in Fourier space. First-order factors use the
//! angular wavenumber `2πk` with the Nyquist bin zeroed (see
//! [`PeriodicGrid::derivative_wavenumber`]); the Laplacian and its inverse use the
//! exact symbol `-|2πk|²` on every bin so that [`poisson_solve`] is an exact inverse.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::field::{ScalarField, Spectrum, VectorField};
use super::grid::PeriodicGrid;
use crate::error::SpectralError;

/// Relative tolerance used by the zero-mean preconditions.
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// Derivative orders `(γ¹, γ²)` along `x` and `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiIndex(pub u32, pub u32);

impl MultiIndex {
    pub fn order(&self) -> u32 {
        self.0 + self.1
    }
}

fn i_pow(m: u32) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn derivative_symbol(grid: &PeriodicGrid, gamma: MultiIndex, a: usize, b: usize) -> Complex64 {
    let k1 = grid.derivative_wavenumber(a);
    let k2 = grid.derivative_wavenumber(b);
    i_pow(gamma.order()) * k1.powi(gamma.0 as i32) * k2.powi(gamma.1 as i32)
}

/// `|2πk|²` on bin `(a, b)`, including the Nyquist bins.
pub fn laplacian_symbol(grid: &PeriodicGrid, a: usize, b: usize) -> f64 {
    let k1 = 2.0 * PI * grid.wavenumber(a) as f64;
    let k2 = 2.0 * PI * grid.wavenumber(b) as f64;
    k1 * k1 + k2 * k2
}

pub fn derivative_spectrum(f: &Spectrum, gamma: MultiIndex) -> Spectrum {
    let grid = f.grid().clone();
    f.apply(|a, b| derivative_symbol(&grid, gamma, a, b))
}

/// Spectral partial derivative `∂^γ f`, `|γ| ≤ 4`.
pub fn derivative(f: &ScalarField, gamma: MultiIndex) -> Result<ScalarField, SpectralError> {
    if gamma.order() > 4 {
        return Err(SpectralError::UnsupportedOrder(gamma.order()));
    }
    if gamma.order() == 0 {
        return Ok(f.clone());
    }
    Ok(derivative_spectrum(&f.spectrum(), gamma).to_field())
}

/// Sobolev norm `(Σ_k (1+|2πk|²)^s |f̂_k|²)^{1/2}` over all resolved modes.
pub fn hs_norm(f: &ScalarField, s: f64) -> f64 {
    hs_norm_spectrum(&f.spectrum(), s)
}

pub fn hs_norm_spectrum(f: &Spectrum, s: f64) -> f64 {
    let grid = f.grid().clone();
    f.weighted_energy(|a, b| (1.0 + laplacian_symbol(&grid, a, b)).powf(s))
        .sqrt()
}

/// `H^s` norm of a vector field: root-sum-square of the component norms.
pub fn hs_norm_vector(v: &VectorField, s: f64) -> f64 {
    (hs_norm(&v.x, s).powi(2) + hs_norm(&v.y, s).powi(2)).sqrt()
}

pub fn laplacian_spectrum(f: &Spectrum) -> Spectrum {
    let grid = f.grid().clone();
    f.apply_real(|a, b| -laplacian_symbol(&grid, a, b))
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    laplacian_spectrum(&f.spectrum()).to_field()
}

/// `Δ^{-1}` on the zero-mean subspace; the mean coefficient is dropped.
pub fn inverse_laplacian_spectrum(f: &Spectrum) -> Spectrum {
    let grid = f.grid().clone();
    f.apply_real(|a, b| {
        let l = laplacian_symbol(&grid, a, b);
        if l == 0.0 {
            0.0
        } else {
            -1.0 / l
        }
    })
}

fn check_zero_mean(f: &ScalarField) -> Result<(), SpectralError> {
    let mean = f.mean();
    let norm = f.l2_norm();
    if mean.abs() > MEAN_TOLERANCE * norm {
        return Err(SpectralError::NonZeroMean { mean, norm });
    }
    Ok(())
}

/// Zero-mean solution of `Δφ = rhs`.
pub fn poisson_solve(rhs: &ScalarField) -> Result<ScalarField, SpectralError> {
    check_zero_mean(rhs)?;
    Ok(inverse_laplacian_spectrum(&rhs.spectrum()).to_field())
}

pub fn dealias_spectrum(f: &Spectrum) -> Spectrum {
    let grid = f.grid().clone();
    let cut = grid.dealias_cutoff();
    f.apply_real(|a, b| {
        if grid.wavenumber(a).abs() > cut || grid.wavenumber(b).abs() > cut {
            0.0
        } else {
            1.0
        }
    })
}

/// Two-thirds rule: zeroes every mode with `|k_i| > n/3`.
pub fn dealias(f: &ScalarField) -> ScalarField {
    dealias_spectrum(&f.spectrum()).to_field()
}

pub fn dealias_vector(v: &VectorField) -> VectorField {
    VectorField::new(dealias(&v.x), dealias(&v.y))
}

/// Grid product followed by two-thirds truncation.
pub fn dealiased_product(a: &ScalarField, b: &ScalarField) -> ScalarField {
    dealias(&a.pointwise(b))
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let s = f.spectrum();
    VectorField::new(
        derivative_spectrum(&s, MultiIndex(1, 0)).to_field(),
        derivative_spectrum(&s, MultiIndex(0, 1)).to_field(),
    )
}

pub fn divergence_spectrum(v: &VectorField) -> Spectrum {
    derivative_spectrum(&v.x.spectrum(), MultiIndex(1, 0))
        .add(&derivative_spectrum(&v.y.spectrum(), MultiIndex(0, 1)))
}

pub fn divergence(v: &VectorField) -> ScalarField {
    divergence_spectrum(v).to_field()
}

/// Scalar vorticity `∂₁v² − ∂₂v¹`.
pub fn curl_spectrum(v: &VectorField) -> Spectrum {
    derivative_spectrum(&v.y.spectrum(), MultiIndex(1, 0))
        .sub(&derivative_spectrum(&v.x.spectrum(), MultiIndex(0, 1)))
}

pub fn curl(v: &VectorField) -> ScalarField {
    curl_spectrum(v).to_field()
}

/// Helmholtz-Hodge split `v = solenoidal + potential + mean`.
#[derive(Debug, Clone, PartialEq)]
pub struct HelmholtzParts {
    pub solenoidal: VectorField,
    pub potential: VectorField,
    pub mean: [f64; 2],
}

/// Splits `v` into a divergence-free part, a gradient part and its mean.
///
/// Bins whose derivative wavenumber vanishes without being the mean (the
/// Nyquist-only bins) carry neither divergence nor curl; they are kept in the
/// solenoidal part so the three pieces always sum back to `v`.
pub fn helmholtz(v: &VectorField) -> HelmholtzParts {
    let grid = v.grid().clone();
    let n = grid.n();
    let sx = v.x.spectrum();
    let sy = v.y.spectrum();
    let mut px = Spectrum::zeros(&grid);
    let mut py = Spectrum::zeros(&grid);
    let mut qx = Spectrum::zeros(&grid);
    let mut qy = Spectrum::zeros(&grid);
    let zero = Complex64::new(0.0, 0.0);
    for a in 0..n {
        let k1 = grid.derivative_wavenumber(a);
        for b in 0..n {
            let idx = a * n + b;
            if idx == 0 {
                continue;
            }
            let k2 = grid.derivative_wavenumber(b);
            let (ux, uy) = (sx.coeffs()[idx], sy.coeffs()[idx]);
            let kk = k1 * k1 + k2 * k2;
            let (gx, gy) = if kk == 0.0 {
                (zero, zero)
            } else {
                let proj = (ux * k1 + uy * k2) / kk;
                (proj * k1, proj * k2)
            };
            qx.coeffs_mut()[idx] = gx;
            qy.coeffs_mut()[idx] = gy;
            px.coeffs_mut()[idx] = ux - gx;
            py.coeffs_mut()[idx] = uy - gy;
        }
    }
    HelmholtzParts {
        solenoidal: VectorField::new(px.to_field(), py.to_field()),
        potential: VectorField::new(qx.to_field(), qy.to_field()),
        mean: [sx.mean(), sy.mean()],
    }
}

/// Leray projection `Πv` including the mean: `v` minus its gradient part.
pub fn leray_projection(v: &VectorField) -> VectorField {
    let parts = helmholtz(v);
    parts.solenoidal.add_constant(parts.mean)
}

pub fn velocity_from_divcurl_spectrum(
    beta: &Spectrum,
    omega: &Spectrum,
    mean: [f64; 2],
) -> (Spectrum, Spectrum) {
    let grid = beta.grid().clone();
    let n = grid.n();
    let mut vx = Spectrum::zeros(&grid);
    let mut vy = Spectrum::zeros(&grid);
    let i = Complex64::new(0.0, 1.0);
    for a in 0..n {
        let k1 = grid.derivative_wavenumber(a);
        for b in 0..n {
            let k2 = grid.derivative_wavenumber(b);
            let kk = k1 * k1 + k2 * k2;
            if kk == 0.0 {
                continue;
            }
            let idx = a * n + b;
            let (bh, wh) = (beta.coeffs()[idx], omega.coeffs()[idx]);
            vx.coeffs_mut()[idx] = i * (-k1 * bh + k2 * wh) / kk;
            vy.coeffs_mut()[idx] = i * (-k2 * bh - k1 * wh) / kk;
        }
    }
    vx.coeffs_mut()[0] = Complex64::new(mean[0], 0.0);
    vy.coeffs_mut()[0] = Complex64::new(mean[1], 0.0);
    (vx, vy)
}

/// The unique field with `div v = β`, `curl v = ω` and `∫v = mean`.
pub fn velocity_from_divcurl(
    beta: &ScalarField,
    omega: &ScalarField,
    mean: [f64; 2],
) -> Result<VectorField, SpectralError> {
    beta.check_grid(omega)?;
    check_zero_mean(beta)?;
    check_zero_mean(omega)?;
    let (vx, vy) = velocity_from_divcurl_spectrum(&beta.spectrum(), &omega.spectrum(), mean);
    Ok(VectorField::new(vx.to_field(), vy.to_field()))
}

/// Evaluates the trigonometric interpolant of `f` at arbitrary points.
pub fn interpolate(f: &Spectrum, points: &[(f64, f64)]) -> Vec<f64> {
    let grid = f.grid();
    let n = grid.n();
    let ks: Vec<f64> = (0..n)
        .map(|a| 2.0 * PI * grid.wavenumber(a) as f64)
        .collect();
    let mut ex = vec![Complex64::new(0.0, 0.0); n];
    let mut ey = vec![Complex64::new(0.0, 0.0); n];
    points
        .iter()
        .map(|&(x, y)| {
            for a in 0..n {
                ex[a] = Complex64::from_polar(1.0, ks[a] * x);
                ey[a] = Complex64::from_polar(1.0, ks[a] * y);
            }
            let mut total = Complex64::new(0.0, 0.0);
            for (row, wx) in f.coeffs().chunks_exact(n).zip(&ex) {
                let inner: Complex64 = row.iter().zip(&ey).map(|(c, e)| c * e).sum();
                total += wx * inner;
            }
            total.re
        })
        .collect()
}
