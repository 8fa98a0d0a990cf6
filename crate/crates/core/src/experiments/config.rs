use std::fmt;
use std::str::FromStr;

use crate::error::ExperimentError;
use crate::flow::{Coupling, Scheme};

/// Analytic base flows used as the incompressible limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseFlowKind {
    /// Steady cellular flow `U(−sin 2πx cos 2πy, cos 2πx sin 2πy)`.
    TaylorGreen,
    /// Two smoothed shear layers with a small transverse perturbation.
    DoubleShear,
}

impl BaseFlowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BaseFlowKind::TaylorGreen => "taylor-green",
            BaseFlowKind::DoubleShear => "double-shear",
        }
    }
}

impl fmt::Display for BaseFlowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaseFlowKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "taylor-green" => Ok(BaseFlowKind::TaylorGreen),
            "double-shear" => Ok(BaseFlowKind::DoubleShear),
            other => Err(ExperimentError::UnknownKind(other.to_string())),
        }
    }
}

/// Which compressible systems a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingChoice {
    Poisson,
    MongeAmpere,
    Both,
}

impl CouplingChoice {
    pub fn couplings(self) -> Vec<Coupling> {
        match self {
            CouplingChoice::Poisson => vec![Coupling::Poisson],
            CouplingChoice::MongeAmpere => vec![Coupling::MongeAmpere],
            CouplingChoice::Both => vec![Coupling::Poisson, Coupling::MongeAmpere],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CouplingChoice::Poisson => "poisson",
            CouplingChoice::MongeAmpere => "monge-ampere",
            CouplingChoice::Both => "both",
        }
    }
}

impl FromStr for CouplingChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "poisson" => Ok(CouplingChoice::Poisson),
            "monge-ampere" => Ok(CouplingChoice::MongeAmpere),
            "both" => Ok(CouplingChoice::Both),
            other => Err(format!(
                "expected poisson, monge-ampere or both, got `{other}`"
            )),
        }
    }
}

/// Parameters of an ε-sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid_n: usize,
    /// Sobolev index of the velocity diagnostics; densities use `s − 1`.
    pub sobolev_s: f64,
    pub final_time: f64,
    /// Explicit time step; `None` picks the scheme's default for each ε.
    pub dt: Option<f64>,
    pub dt_policy: Scheme,
    /// Strictly decreasing.
    pub epsilon_list: Vec<f64>,
    pub base_flow: BaseFlowKind,
    /// Velocity scale `U` of the base flow.
    pub base_speed: f64,
    pub amplitude: f64,
    pub seed: u64,
    pub coupling: CouplingChoice,
    pub ma_tol: f64,
    pub ma_max_newton: usize,
    /// Samples per fast period `2πε` of the smallest ε.
    pub sample_cadence: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            grid_n: 64,
            sobolev_s: 2.0,
            final_time: 0.5,
            dt: None,
            dt_policy: Scheme::Rk4,
            epsilon_list: vec![0.2, 0.1, 0.05, 0.025],
            base_flow: BaseFlowKind::TaylorGreen,
            base_speed: 0.2,
            amplitude: 1.0,
            seed: 1,
            coupling: CouplingChoice::Poisson,
            ma_tol: 1e-10,
            ma_max_newton: 30,
            sample_cadence: 20.0,
        }
    }
}

fn invalid(field: &'static str, message: impl Into<String>) -> ExperimentError {
    ExperimentError::InvalidConfig {
        field,
        message: message.into(),
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.grid_n < 8 || !self.grid_n.is_multiple_of(2) {
            return Err(invalid(
                "grid_n",
                format!("must be even and at least 8, got {}", self.grid_n),
            ));
        }
        if !(self.sobolev_s >= 2.0 && self.sobolev_s.is_finite()) {
            return Err(invalid(
                "sobolev_s",
                format!("must be at least 2, got {}", self.sobolev_s),
            ));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(invalid(
                "final_time",
                format!("must be positive, got {}", self.final_time),
            ));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid("dt", format!("must be positive, got {dt}")));
            }
        }
        if self.epsilon_list.is_empty() {
            return Err(invalid("epsilon_list", "must not be empty"));
        }
        if let Some(bad) = self
            .epsilon_list
            .iter()
            .find(|e| !(**e > 0.0 && e.is_finite()))
        {
            return Err(invalid(
                "epsilon_list",
                format!("values must be positive, got {bad}"),
            ));
        }
        if self.epsilon_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid(
                "epsilon_list",
                "values must be strictly decreasing",
            ));
        }
        if !(self.base_speed >= 0.0 && self.base_speed.is_finite()) {
            return Err(invalid(
                "base_speed",
                format!("must be non-negative, got {}", self.base_speed),
            ));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(invalid(
                "amplitude",
                format!("must be non-negative, got {}", self.amplitude),
            ));
        }
        if !(self.ma_tol > 0.0 && self.ma_tol.is_finite()) {
            return Err(invalid(
                "ma_tol",
                format!("must be positive, got {}", self.ma_tol),
            ));
        }
        if self.ma_max_newton == 0 {
            return Err(invalid("ma_max_newton", "must be at least 1"));
        }
        if !(self.sample_cadence > 0.0 && self.sample_cadence.is_finite()) {
            return Err(invalid(
                "sample_cadence",
                format!("must be positive, got {}", self.sample_cadence),
            ));
        }
        Ok(())
    }

    pub fn smallest_epsilon(&self) -> f64 {
        self.epsilon_list
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Time step the configured scheme would take at `eps`, before it is fitted
    /// to the sampling grid.
    pub fn target_dt(&self, eps: f64) -> f64 {
        if let Some(dt) = self.dt {
            return dt;
        }
        match self.dt_policy {
            Scheme::Rk4 => (crate::flow::STIFF_CONSTANT * eps).min(2e-3),
            Scheme::LieSplitIf => 1e-3,
        }
    }

    pub fn ma_options(&self) -> crate::monge_ampere::MaOptions {
        crate::monge_ampere::MaOptions {
            tol: self.ma_tol,
            max_newton: self.ma_max_newton,
            ..Default::default()
        }
    }
}
