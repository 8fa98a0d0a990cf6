use rustfft::num_complex::Complex64;

use super::state::{Coupling, FlowState};
use crate::error::FlowError;
use crate::monge_ampere::{ma_solve, ConvexPotential, MaOptions};
use crate::spectral::{
    dealias_spectrum, derivative_spectrum, gradient, inverse_laplacian_spectrum,
    velocity_from_divcurl_spectrum, MultiIndex, ScalarField, Spectrum, VectorField,
};

const DX: MultiIndex = MultiIndex(1, 0);
const DY: MultiIndex = MultiIndex(0, 1);

/// `P(a·∇f)` for a field `f` given by its spectrum.
fn transport(a: &VectorField, f: &Spectrum) -> ScalarField {
    let fx = derivative_spectrum(f, DX).to_field();
    let fy = derivative_spectrum(f, DY).to_field();
    let n = fx.values().len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        out.push(a.x.values()[k] * fx.values()[k] + a.y.values()[k] * fy.values()[k]);
    }
    dealias_spectrum(&ScalarField::new(a.grid(), out).spectrum()).to_field()
}

/// `P(v·∇v)`.
pub(crate) fn advection(v: &VectorField) -> VectorField {
    VectorField::new(transport(v, &v.x.spectrum()), transport(v, &v.y.spectrum()))
}

/// `P div(ρv)`.
pub(crate) fn flux_divergence(rho: &ScalarField, v: &VectorField) -> ScalarField {
    let fx = rho.pointwise(&v.x).spectrum();
    let fy = rho.pointwise(&v.y).spectrum();
    let div = derivative_spectrum(&fx, DX).add(&derivative_spectrum(&fy, DY));
    dealias_spectrum(&div).to_field()
}

/// Vorticity tendency `−v·∇ω` of incompressible Euler, with `v` rebuilt from
/// `ω` and the mean velocity.
pub fn euler_rhs(omega: &ScalarField, mean_v: [f64; 2]) -> ScalarField {
    let w = omega.spectrum();
    let zero = Spectrum::zeros(omega.grid());
    let (vx, vy) = velocity_from_divcurl_spectrum(&zero, &w, mean_v);
    let v = VectorField::new(vx.to_field(), vy.to_field());
    transport(&v, &w).scale(-1.0)
}

/// Potential `φ` with `εΔφ = ρ − 1` (the mean of `ρ` is discarded).
pub fn poisson_potential(rho: &ScalarField, eps: f64) -> ScalarField {
    let mut s = rho.spectrum();
    s.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    inverse_laplacian_spectrum(&s).scale(1.0 / eps).to_field()
}

/// Electrostatic acceleration `∇φ/ε`.
pub fn poisson_force(rho: &ScalarField, eps: f64) -> VectorField {
    gradient(&poisson_potential(rho, eps)).scale(1.0 / eps)
}

/// Transport acceleration `(∇ψ − x)/ε² = ∇φ/ε²`.
pub fn ma_force(phi: &ConvexPotential, eps: f64) -> VectorField {
    gradient(phi.phi()).scale(1.0 / (eps * eps))
}

fn require(state: &FlowState, coupling: Coupling) -> Result<(), FlowError> {
    if state.coupling != coupling {
        return Err(FlowError::CouplingMismatch {
            expected: coupling.as_str(),
        });
    }
    Ok(())
}

/// `(−P div(ρv), −P(v·∇v) + force)`.
pub(crate) fn compressible_rhs(
    state: &FlowState,
    force: &VectorField,
) -> (ScalarField, VectorField) {
    let drho = flux_divergence(&state.rho, &state.v).scale(-1.0);
    let adv = advection(&state.v);
    let dv = VectorField::new(&force.x - &adv.x, &force.y - &adv.y);
    (drho, dv)
}

/// Euler-Poisson tendencies `(∂_t ρ, ∂_t v)`.
pub fn ep_rhs(state: &FlowState) -> Result<(ScalarField, VectorField), FlowError> {
    require(state, Coupling::Poisson)?;
    let force = poisson_force(&state.rho, state.eps);
    Ok(compressible_rhs(state, &force))
}

/// Euler-Monge-Ampère tendencies, solving the transport problem from `φ = 0`.
pub fn ema_rhs(state: &FlowState) -> Result<(ScalarField, VectorField), FlowError> {
    require(state, Coupling::MongeAmpere)?;
    let (phi, _) = ma_solve(&state.rho, &MaOptions::default())?;
    Ok(compressible_rhs(state, &ma_force(&phi, state.eps)))
}

/// Total momentum `∫ρv`.
pub fn momentum(state: &FlowState) -> [f64; 2] {
    [state.rho.inner(&state.v.x), state.rho.inner(&state.v.y)]
}

fn kinetic(state: &FlowState) -> f64 {
    0.5 * state.rho.inner(&state.v.norm_sqr_field())
}

/// Energy with a known transport potential (ignored unless the coupling is
/// Monge-Ampère).
pub fn energy_with_potential(state: &FlowState, phi: &ConvexPotential) -> f64 {
    match state.coupling {
        Coupling::MongeAmpere => {
            let g = gradient(phi.phi());
            kinetic(state) + 0.5 / (state.eps * state.eps) * state.rho.inner(&g.norm_sqr_field())
        }
        _ => energy_closed_form(state),
    }
}

fn energy_closed_form(state: &FlowState) -> f64 {
    match state.coupling {
        Coupling::Euler => 0.5 * state.v.inner(&state.v),
        Coupling::Poisson => {
            let g = gradient(&poisson_potential(&state.rho, state.eps));
            kinetic(state) + 0.5 * g.inner(&g)
        }
        Coupling::MongeAmpere => unreachable!("needs a transport potential"),
    }
}

/// Conserved energy of the state's system:
/// `½∫|v|²`, `½∫ρ|v|² + ½∫|∇φ|²` or `½∫ρ|v|² + (1/2ε²)∫ρ|∇ψ − x|²`.
pub fn energy(state: &FlowState) -> Result<f64, FlowError> {
    match state.coupling {
        Coupling::MongeAmpere => {
            let (phi, _) = ma_solve(&state.rho, &MaOptions::default())?;
            Ok(energy_with_potential(state, &phi))
        }
        _ => Ok(energy_closed_form(state)),
    }
}
