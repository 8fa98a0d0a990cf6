use std::fmt;
use std::str::FromStr;

use super::rhs::{compressible_rhs, euler_rhs, ma_force, poisson_force};
use super::state::{Coupling, FlowState};
use crate::error::{FlowError, MaError};
use crate::monge_ampere::{ma_solve_from, ConvexPotential, MaOptions};
use crate::spectral::{
    curl, divergence_spectrum, velocity_from_divcurl_spectrum, ScalarField, Spectrum, VectorField,
};
use rustfft::num_complex::Complex64;

/// Largest `dt/ε` accepted by plain RK4 on the compressible systems.
pub const STIFF_CONSTANT: f64 = 0.5;

/// Steps that push `min ρ` below this value are rejected.
pub const POSITIVITY_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Classical four-stage Runge-Kutta on `(ρ, v)`.
    Rk4,
    /// Strang splitting: exact rotation of the fast `(div v, (ρ−1)/ε)` block
    /// around RK4 on the remainder.
    LieSplitIf,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Rk4 => "rk4",
            Scheme::LieSplitIf => "lie-split-if",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" => Ok(Scheme::Rk4),
            "lie-split-if" => Ok(Scheme::LieSplitIf),
            other => Err(format!("unknown scheme `{other}`")),
        }
    }
}

#[derive(Clone)]
struct Fields {
    rho: ScalarField,
    v: VectorField,
}

impl Fields {
    fn axpy(&self, c: f64, d: &Fields) -> Fields {
        Fields {
            rho: self.rho.axpy(c, &d.rho),
            v: self.v.axpy(c, &d.v),
        }
    }
}

fn rk4_fields(
    y: &Fields,
    dt: f64,
    mut f: impl FnMut(&Fields) -> Result<Fields, FlowError>,
) -> Result<Fields, FlowError> {
    let k1 = f(y)?;
    let k2 = f(&y.axpy(0.5 * dt, &k1))?;
    let k3 = f(&y.axpy(0.5 * dt, &k2))?;
    let k4 = f(&y.axpy(dt, &k3))?;
    Ok(y.axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4))
}

/// Exact flow of `∂_t ρ = −div v`, `∂_t v = ∇Δ^{-1}(ρ − 1)/ε²` over `h`.
fn rotate(y: &Fields, h: f64, eps: f64) -> Fields {
    let grid = y.rho.grid().clone();
    let n = grid.n();
    let beta = divergence_spectrum(&y.v);
    let r = y.rho.spectrum();
    let (s, c) = (h / eps).sin_cos();
    let mut dbeta = Spectrum::zeros(&grid);
    let mut drho = Spectrum::zeros(&grid);
    for a in 0..n {
        let k1 = grid.derivative_wavenumber(a);
        for b in 0..n {
            let k2 = grid.derivative_wavenumber(b);
            if k1 == 0.0 && k2 == 0.0 {
                continue;
            }
            let idx = a * n + b;
            let (bh, rh) = (beta.coeffs()[idx], r.coeffs()[idx] / eps);
            let b_new = bh * c + rh * s;
            let r_new = -bh * s + rh * c;
            dbeta.coeffs_mut()[idx] = b_new - bh;
            drho.coeffs_mut()[idx] = (r_new - rh) * eps;
        }
    }
    let zero = Spectrum::zeros(&grid);
    let (dvx, dvy) = velocity_from_divcurl_spectrum(&dbeta, &zero, [0.0, 0.0]);
    drho.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    Fields {
        rho: &y.rho + &drho.to_field(),
        v: &y.v + &VectorField::new(dvx.to_field(), dvy.to_field()),
    }
}

/// Linear part removed from the full tendency when splitting.
fn fast_tendency(y: &Fields, eps: f64) -> Fields {
    let beta = divergence_spectrum(&y.v).to_field();
    Fields {
        rho: beta.scale(-1.0),
        v: poisson_force(&y.rho, eps),
    }
}

/// Advances flow states, carrying the warm start of the Monge-Ampère solver
/// from one call to the next.
#[derive(Debug, Clone)]
pub struct Integrator {
    scheme: Scheme,
    ma: MaOptions,
    warm: Option<ConvexPotential>,
    max_mass_drift: f64,
}

impl Integrator {
    pub fn new(scheme: Scheme, ma: MaOptions) -> Self {
        Self {
            scheme,
            ma,
            warm: None,
            max_mass_drift: 0.0,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn ma_options(&self) -> &MaOptions {
        &self.ma
    }

    /// Largest `|∫ρ − 1|` seen before renormalization.
    pub fn max_mass_drift(&self) -> f64 {
        self.max_mass_drift
    }

    /// Transport potential of `rho`, warm-started from the previous solve.
    pub fn potential(&mut self, rho: &ScalarField) -> Result<ConvexPotential, MaError> {
        let guess = self.warm.as_ref().filter(|w| w.phi().grid() == rho.grid());
        let (phi, report) = ma_solve_from(rho, guess, &self.ma)?;
        log::trace!(
            "transport solve: {} Newton steps, residual {:e}",
            report.iterations,
            report.final_residual()
        );
        self.warm = Some(phi.clone());
        Ok(phi)
    }

    /// Tendencies `(∂_t ρ, ∂_t v)` of a compressible state.
    pub fn rhs(&mut self, state: &FlowState) -> Result<(ScalarField, VectorField), FlowError> {
        let force = match state.coupling {
            Coupling::Poisson => poisson_force(&state.rho, state.eps),
            Coupling::MongeAmpere => ma_force(&self.potential(&state.rho)?, state.eps),
            Coupling::Euler => {
                return Err(FlowError::CouplingMismatch {
                    expected: "a compressible",
                })
            }
        };
        Ok(compressible_rhs(state, &force))
    }

    /// Energy of `state`, reusing the warm start for the transport potential.
    pub fn energy(&mut self, state: &FlowState) -> Result<f64, FlowError> {
        match state.coupling {
            Coupling::MongeAmpere => {
                let phi = self.potential(&state.rho)?;
                Ok(super::rhs::energy_with_potential(state, &phi))
            }
            _ => super::rhs::energy(state),
        }
    }

    fn tendency(&mut self, template: &FlowState, y: &Fields) -> Result<Fields, FlowError> {
        let state = FlowState {
            t: template.t,
            rho: y.rho.clone(),
            v: y.v.clone(),
            eps: template.eps,
            coupling: template.coupling,
        };
        let (rho, v) = self.rhs(&state).map_err(|e| match e {
            FlowError::MongeAmpere(err) => FlowError::StepRejected {
                t: template.t,
                reason: format!("transport solve failed: {err}"),
            },
            other => other,
        })?;
        Ok(Fields { rho, v })
    }

    /// Advances `state` by `dt`.
    pub fn step(&mut self, state: &FlowState, dt: f64) -> Result<FlowState, FlowError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(FlowError::InvalidState {
                reason: format!("time step must be positive, got {dt}"),
            });
        }
        if state.coupling == Coupling::Euler {
            return Ok(step_euler(state, dt));
        }
        let eps = state.eps;
        let y = Fields {
            rho: state.rho.clone(),
            v: state.v.clone(),
        };
        let y = match self.scheme {
            Scheme::Rk4 => {
                let limit = STIFF_CONSTANT * eps;
                if dt > limit {
                    return Err(FlowError::StiffStep { dt, limit });
                }
                rk4_fields(&y, dt, |z| self.tendency(state, z))?
            }
            Scheme::LieSplitIf => {
                let half = rotate(&y, 0.5 * dt, eps);
                let mid = rk4_fields(&half, dt, |z| {
                    let full = self.tendency(state, z)?;
                    Ok(full.axpy(-1.0, &fast_tendency(z, eps)))
                })?;
                rotate(&mid, 0.5 * dt, eps)
            }
        };
        self.finish(state, y, dt)
    }

    fn finish(&mut self, state: &FlowState, y: Fields, dt: f64) -> Result<FlowState, FlowError> {
        let t = state.t + dt;
        if !(y.rho.is_finite() && y.v.is_finite()) {
            return Err(FlowError::StepRejected {
                t,
                reason: "non-finite values".into(),
            });
        }
        let min = y.rho.min();
        if min < POSITIVITY_FLOOR {
            return Err(FlowError::StepRejected {
                t,
                reason: format!("density minimum {min:e} below {POSITIVITY_FLOOR}"),
            });
        }
        let mass = y.rho.mean();
        let drift = (mass - 1.0).abs();
        self.max_mass_drift = self.max_mass_drift.max(drift);
        if drift > 1e-12 {
            log::warn!("mass drift {drift:e} at t = {t}");
        }
        Ok(FlowState {
            t,
            rho: y.rho.scale(1.0 / mass),
            v: y.v,
            eps: state.eps,
            coupling: state.coupling,
        })
    }
}

/// RK4 on the vorticity of an incompressible state.
fn step_euler(state: &FlowState, dt: f64) -> FlowState {
    let mean = state.v.mean();
    let w0 = curl(&state.v);
    let k1 = euler_rhs(&w0, mean);
    let k2 = euler_rhs(&w0.axpy(0.5 * dt, &k1), mean);
    let k3 = euler_rhs(&w0.axpy(0.5 * dt, &k2), mean);
    let k4 = euler_rhs(&w0.axpy(dt, &k3), mean);
    let w = w0
        .axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4);
    let zero = Spectrum::zeros(state.grid());
    let (vx, vy) = velocity_from_divcurl_spectrum(&zero, &w.spectrum(), mean);
    FlowState {
        t: state.t + dt,
        rho: state.rho.clone(),
        v: VectorField::new(vx.to_field(), vy.to_field()),
        eps: state.eps,
        coupling: state.coupling,
    }
}

/// One step with a fresh integrator (no warm start).
pub fn step(state: &FlowState, dt: f64, scheme: Scheme) -> Result<FlowState, FlowError> {
    Integrator::new(scheme, MaOptions::default()).step(state, dt)
}
