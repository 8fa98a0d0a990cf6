//! Right-hand sides, conserved quantities, perturbation variables and time
//! stepping for incompressible Euler, Euler-Poisson and Euler-Monge-Ampère.
//!
//! Sign convention: `∂_t v + v·∇v = ∇p` for Euler and `+∇φ/ε` for Euler-Poisson.
//! All state fields are kept inside the two-thirds band; every quadratic term is
//! truncated after its grid product.

mod base;
mod integrate;
mod perturbation;
mod rhs;
mod state;

pub use base::{pressure_from_velocity, BaseFlow};
pub use integrate::{step, Integrator, Scheme, POSITIVITY_FLOOR, STIFF_CONSTANT};
pub use perturbation::{
    nonprepared_variables, oscillation_filter, perturbation_from_primitive, rotation_phase,
    PerturbationState, Scaling,
};
pub use rhs::{
    ema_rhs, energy, energy_with_potential, ep_rhs, euler_rhs, ma_force, momentum, poisson_force,
    poisson_potential,
};
pub use state::{Coupling, FlowState};
