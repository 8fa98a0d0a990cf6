use std::f64::consts::PI;

use super::fit::{fit_or_flag, RateFit};
use crate::error::MaError;
use crate::monge_ampere::{linearization_defect, ma_solve, ConvexPotential, MaOptions};
use crate::spectral::{hs_norm, PeriodicGrid, ScalarField};

const TAU: f64 = 2.0 * PI;

/// Amplitudes of the potential family used by [`defect_study`].
pub const DEFECT_AMPLITUDES: [f64; 4] = [0.04, 0.02, 0.01, 0.005];

/// Recovery of `φ* = a·cos(2πx)cos(2πy)` from `ρ = det(I + D²φ*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedCheck {
    pub amplitude: f64,
    pub h2_error: f64,
    pub iterations: usize,
    pub residual: f64,
}

pub fn manufactured_check(
    grid: &PeriodicGrid,
    amplitude: f64,
    options: &MaOptions,
) -> Result<ManufacturedCheck, MaError> {
    let exact = ScalarField::from_fn(grid, |x, y| amplitude * (TAU * x).cos() * (TAU * y).cos());
    let rho = ConvexPotential::new(exact.clone())
        .hessian()
        .det_identity_plus();
    let (phi, report) = ma_solve(&rho, options)?;
    Ok(ManufacturedCheck {
        amplitude,
        h2_error: hs_norm(&(phi.phi() - &exact), 2.0),
        iterations: report.iterations,
        residual: report.final_residual(),
    })
}

/// Linearization defect against `‖ρ − 1‖_{H²}` for densities generated by a
/// scaled family of potentials; the fitted slope should be close to 2.
pub fn defect_study(grid: &PeriodicGrid, options: &MaOptions) -> Result<RateFit, MaError> {
    let raw = ScalarField::from_fn(grid, |x, y| {
        (TAU * x).cos() * (TAU * y).cos() + 0.5 * (TAU * (x + 2.0 * y)).sin()
    });
    // normalise so |D²φ₀| ≤ 1 and every member of the family stays convex
    let h = ConvexPotential::new(raw.clone()).hessian();
    let bound = (0..grid.len())
        .map(|k| h.xx.values()[k].abs() + h.xy.values()[k].abs() + h.yy.values()[k].abs())
        .fold(0.0, f64::max);
    let phi0 = raw.scale(1.0 / bound);
    let mut points = Vec::with_capacity(DEFECT_AMPLITUDES.len());
    for a in DEFECT_AMPLITUDES {
        let rho = ConvexPotential::new(phi0.scale(a))
            .hessian()
            .det_identity_plus();
        let (phi, _) = ma_solve(&rho, options)?;
        points.push((
            hs_norm(&rho.add_constant(-1.0), 2.0),
            linearization_defect(&phi, &rho, 2.0),
        ));
    }
    Ok(fit_or_flag("linearization_defect", &points))
}
