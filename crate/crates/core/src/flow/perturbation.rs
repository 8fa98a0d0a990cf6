use super::base::BaseFlow;
use super::state::FlowState;
use crate::error::FlowError;
use crate::spectral::{curl, divergence, velocity_from_divcurl_spectrum, ScalarField, VectorField};

/// How the perturbation variables are scaled with `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    /// `curl v = ω̄ + εω₁`, `div v = εβ₁`, `ρ = 1 + ε²(ρ̃₁ + Δp)`.
    WellPrepared,
    /// `ω = curl v`, `β = div v`, `ρ = 1 + ερ₁`.
    NonPrepared,
}

/// Vorticity, divergence and density fluctuation of a state, relative to a base flow.
///
/// For [`Scaling::WellPrepared`] `rho1` holds the pressure-shifted `ρ̃₁`; the pair
/// `(beta1, rho1)` is the one rotated at frequency `1/ε` by the linear dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationState {
    pub omega1: ScalarField,
    pub beta1: ScalarField,
    pub rho1: ScalarField,
    pub eps: f64,
    pub scaling: Scaling,
}

/// Well-prepared perturbation variables of `state` around `base`.
pub fn perturbation_from_primitive(state: &FlowState, base: &BaseFlow) -> PerturbationState {
    let eps = state.eps;
    let omega1 = (&curl(&state.v) - &base.omega).scale(1.0 / eps);
    let beta1 = divergence(&state.v).scale(1.0 / eps);
    let rho1 = &state.rho.add_constant(-1.0).scale(1.0 / (eps * eps)) - &base.pressure_laplacian();
    PerturbationState {
        omega1,
        beta1,
        rho1,
        eps,
        scaling: Scaling::WellPrepared,
    }
}

/// Unscaled `(curl v, div v, (ρ − 1)/ε)`.
pub fn nonprepared_variables(state: &FlowState) -> PerturbationState {
    PerturbationState {
        omega1: curl(&state.v),
        beta1: divergence(&state.v),
        rho1: state.rho.add_constant(-1.0).scale(1.0 / state.eps),
        eps: state.eps,
        scaling: Scaling::NonPrepared,
    }
}

impl PerturbationState {
    /// Rebuilds `(ρ, v)`; the mean of `v` is fixed by the total momentum `∫ρv`.
    pub fn to_primitive(
        &self,
        base: Option<&BaseFlow>,
        momentum: [f64; 2],
    ) -> Result<(ScalarField, VectorField), FlowError> {
        let eps = self.eps;
        let (rho, beta, omega) = match self.scaling {
            Scaling::WellPrepared => {
                let base = base.ok_or_else(|| FlowError::InvalidState {
                    reason: "well-prepared variables need their base flow".into(),
                })?;
                let rho1 = &self.rho1 + &base.pressure_laplacian();
                (
                    rho1.scale(eps * eps).add_constant(1.0),
                    self.beta1.scale(eps),
                    &base.omega + &self.omega1.scale(eps),
                )
            }
            Scaling::NonPrepared => (
                self.rho1.scale(eps).add_constant(1.0),
                self.beta1.clone(),
                self.omega1.clone(),
            ),
        };
        let (vx, vy) =
            velocity_from_divcurl_spectrum(&beta.spectrum(), &omega.spectrum(), [0.0, 0.0]);
        let fluctuation = VectorField::new(vx.to_field(), vy.to_field());
        let mass = rho.mean();
        let mean = [
            (momentum[0] - rho.inner(&fluctuation.x)) / mass,
            (momentum[1] - rho.inner(&fluctuation.y)) / mass,
        ];
        Ok((rho, fluctuation.add_constant(mean)))
    }

    /// `L²×L²` norm of the rotating pair `(β₁, ρ̃₁)`.
    pub fn rotating_norm(&self) -> f64 {
        (self.beta1.inner(&self.beta1) + self.rho1.inner(&self.rho1)).sqrt()
    }
}

/// Exact flow of the fast linear block over `dt`: rotates `(β₁, ρ̃₁)` by `dt/ε`.
pub fn rotation_phase(u: &PerturbationState, dt: f64) -> PerturbationState {
    let (s, c) = (dt / u.eps).sin_cos();
    PerturbationState {
        omega1: u.omega1.clone(),
        beta1: u.beta1.zip_map(&u.rho1, |b, r| c * b + s * r),
        rho1: u.beta1.zip_map(&u.rho1, |b, r| -s * b + c * r),
        eps: u.eps,
        scaling: u.scaling,
    }
}

/// Removes the fast oscillation: `β̃ + iρ̃ = e^{it/ε}(β + iρ)`.
pub fn oscillation_filter(u: &PerturbationState, t: f64) -> (ScalarField, ScalarField) {
    let (s, c) = (t / u.eps).sin_cos();
    (
        u.beta1.zip_map(&u.rho1, |b, r| c * b - s * r),
        u.beta1.zip_map(&u.rho1, |b, r| s * b + c * r),
    )
}
