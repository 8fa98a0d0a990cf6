use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::BaseFlowKind;
use crate::flow::{BaseFlow, Coupling, FlowState};
use crate::spectral::{
    dealias, gradient, hs_norm, hs_norm_vector, leray_projection, PeriodicGrid, ScalarField,
    VectorField,
};

const TAU: f64 = 2.0 * PI;

/// Largest wavenumber modulus of the random perturbations.
pub const PERTURBATION_BAND: i64 = 4;

/// Lower bound kept on the initial density when capping amplitudes.
const DENSITY_MARGIN: f64 = 0.5;

/// Half-width of the smoothed shear layers.
const SHEAR_WIDTH: f64 = 0.08;

/// Samples an analytic base flow with velocity scale `speed`.
pub fn make_base_flow(kind: BaseFlowKind, grid: &PeriodicGrid, speed: f64) -> BaseFlow {
    let v = match kind {
        BaseFlowKind::TaylorGreen => VectorField::from_fn(grid, |x, y| {
            [
                -speed * (TAU * x).sin() * (TAU * y).cos(),
                speed * (TAU * x).cos() * (TAU * y).sin(),
            ]
        }),
        BaseFlowKind::DoubleShear => {
            // u depends on y only and v on x only, so the field is divergence-free
            let u = ScalarField::from_fn(grid, |_, y| {
                let s = if y <= 0.5 {
                    ((y - 0.25) / SHEAR_WIDTH).tanh()
                } else {
                    ((0.75 - y) / SHEAR_WIDTH).tanh()
                };
                speed * s
            });
            let w = ScalarField::from_fn(grid, |x, _| 0.05 * speed * (TAU * x).sin());
            let mut u = dealias(&u);
            let mean = u.mean();
            u = u.add_constant(-mean);
            VectorField::new(u, w)
        }
    };
    BaseFlow::from_velocity(v)
}

/// Random real trigonometric polynomial with `0 < |k| ≤ PERTURBATION_BAND`.
fn random_band_field(grid: &PeriodicGrid, rng: &mut ChaCha8Rng) -> ScalarField {
    let mut modes = Vec::new();
    for k1 in 0..=PERTURBATION_BAND {
        for k2 in -PERTURBATION_BAND..=PERTURBATION_BAND {
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            if k1 * k1 + k2 * k2 > PERTURBATION_BAND * PERTURBATION_BAND {
                continue;
            }
            let a: f64 = rng.gen_range(-1.0..=1.0);
            let b: f64 = rng.gen_range(-1.0..=1.0);
            modes.push((k1 as f64, k2 as f64, a, b));
        }
    }
    ScalarField::from_fn(grid, |x, y| {
        modes
            .iter()
            .map(|&(k1, k2, a, b)| {
                let phase = TAU * (k1 * x + k2 * y);
                a * phase.cos() + b * phase.sin()
            })
            .sum()
    })
}

fn random_vector(grid: &PeriodicGrid, rng: &mut ChaCha8Rng) -> VectorField {
    let x = random_band_field(grid, rng);
    let y = random_band_field(grid, rng);
    VectorField::new(x, y)
}

/// Well-prepared data `v₀ = v̄₀ + εv₁⁰`, `ρ₀ = 1 + ε²ρ₁⁰` with `‖v₁⁰‖_{H^s} =
/// ‖ρ₁⁰‖_{H^{s−1}} = amplitude`.
///
/// The perturbation shapes depend only on `seed`. The density amplitude is
/// lowered if needed to keep `ρ₀ ≥ 1/2`.
pub fn make_well_prepared_ic(
    base: &BaseFlow,
    eps: f64,
    seed: u64,
    amplitude: f64,
    s: f64,
    coupling: Coupling,
) -> FlowState {
    let grid = base.v.grid().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v1 = random_vector(&grid, &mut rng);
    let v1 = v1.scale(1.0 / hs_norm_vector(&v1, s));
    let rho1 = random_band_field(&grid, &mut rng);
    let rho1 = rho1.scale(1.0 / hs_norm(&rho1, s - 1.0));

    let mut rho_amp = amplitude;
    let dip = eps * eps * rho1.max_abs() * amplitude;
    if dip > 1.0 - DENSITY_MARGIN {
        rho_amp = (1.0 - DENSITY_MARGIN) / (eps * eps * rho1.max_abs());
        log::warn!("density amplitude capped at {rho_amp:e} for eps = {eps}");
    }
    let v = base.v.axpy(eps * amplitude, &v1);
    let rho = rho1.scale(eps * eps * rho_amp).add_constant(1.0);
    FlowState::new(rho, v, eps, coupling).expect("density stays above the margin")
}

/// Amplitudes of the non-prepared data, as L² norms.
pub const NONPREPARED_SOLENOIDAL: f64 = 0.1;
pub const NONPREPARED_GRADIENT: f64 = 0.02;
pub const NONPREPARED_DENSITY: f64 = 0.02;

/// Generic data: an O(1) solenoidal velocity, an O(1) gradient part and
/// `ρ₀ = 1 + ερ₁⁰`. Only the density scaling depends on `eps`.
pub fn make_nonprepared_ic(
    grid: &PeriodicGrid,
    eps: f64,
    seed: u64,
    coupling: Coupling,
) -> FlowState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sol = leray_projection(&random_vector(grid, &mut rng));
    let sol = sol.scale(NONPREPARED_SOLENOIDAL / sol.l2_norm());
    let pot = gradient(&random_band_field(grid, &mut rng));
    let pot = pot.scale(NONPREPARED_GRADIENT / pot.l2_norm());
    let rho1 = random_band_field(grid, &mut rng);
    let mut rho1 = rho1.scale(NONPREPARED_DENSITY / rho1.l2_norm());
    let dip = eps * rho1.max_abs();
    if dip > 1.0 - DENSITY_MARGIN {
        rho1 = rho1.scale((1.0 - DENSITY_MARGIN) / dip);
    }
    let rho = rho1.scale(eps).add_constant(1.0);
    FlowState::new(rho, &sol + &pot, eps, coupling).expect("density stays above the margin")
}
