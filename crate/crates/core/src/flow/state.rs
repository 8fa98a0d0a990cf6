use std::fmt;
use std::str::FromStr;

use crate::error::FlowError;
use crate::spectral::{PeriodicGrid, ScalarField, VectorField};

/// Which force closes the momentum equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coupling {
    /// Incompressible Euler: `ρ ≡ 1`, `div v = 0`.
    Euler,
    /// Electrostatic force `∇φ/ε` with `εΔφ = ρ − 1`.
    Poisson,
    /// Optimal-transport force `(∇ψ − x)/ε²` with `det D²ψ = ρ`.
    MongeAmpere,
}

impl Coupling {
    pub fn as_str(self) -> &'static str {
        match self {
            Coupling::Euler => "euler",
            Coupling::Poisson => "poisson",
            Coupling::MongeAmpere => "monge-ampere",
        }
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Coupling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" | "euler" => Ok(Coupling::Euler),
            "poisson" => Ok(Coupling::Poisson),
            "monge-ampere" => Ok(Coupling::MongeAmpere),
            other => Err(format!("unknown coupling `{other}`")),
        }
    }
}

/// Density and velocity of one trajectory at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub rho: ScalarField,
    pub v: VectorField,
    pub eps: f64,
    pub coupling: Coupling,
}

impl FlowState {
    pub fn new(
        rho: ScalarField,
        v: VectorField,
        eps: f64,
        coupling: Coupling,
    ) -> Result<Self, FlowError> {
        rho.check_grid(&v.x)?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(FlowError::InvalidState {
                reason: format!("eps must be positive, got {eps}"),
            });
        }
        let min = rho.min();
        if min.is_nan() || min <= 0.0 {
            return Err(FlowError::InvalidState {
                reason: format!("density must be positive, min is {min:e}"),
            });
        }
        Ok(Self {
            t: 0.0,
            rho,
            v,
            eps,
            coupling,
        })
    }

    /// Incompressible state with `ρ ≡ 1`.
    pub fn incompressible(v: VectorField) -> Self {
        Self {
            t: 0.0,
            rho: ScalarField::constant(v.grid(), 1.0),
            v,
            eps: 1.0,
            coupling: Coupling::Euler,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.rho.grid()
    }

    pub fn mass(&self) -> f64 {
        self.rho.mean()
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }
}
