use std::f64::consts::PI;

use super::config::SweepConfig;
use crate::error::{ExperimentError, FlowError};
use crate::flow::{
    momentum, nonprepared_variables, oscillation_filter, perturbation_from_primitive, BaseFlow,
    Coupling, FlowState, Integrator, Scaling, Scheme,
};
use crate::monge_ampere::MaOptions;
use crate::spectral::{helmholtz, hs_norm, hs_norm_vector, VectorField};

/// How often a rejected sample interval may be retried with half the step.
pub const MAX_STEP_HALVINGS: u32 = 3;

/// Uniform sampling grid `t_k = k·interval`, `k = 0..=samples`, shared by all
/// runs of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPlan {
    pub interval: f64,
    pub samples: usize,
}

impl SamplingPlan {
    /// At least `sample_cadence` samples per period `2πε` of the smallest ε.
    pub fn for_config(config: &SweepConfig) -> Self {
        let period = 2.0 * PI * config.smallest_epsilon();
        let samples = (config.final_time * config.sample_cadence / period)
            .ceil()
            .max(1.0) as usize;
        Self {
            interval: config.final_time / samples as f64,
            samples,
        }
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.interval
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.samples)
    }

    /// Number of equal steps per interval so that no step exceeds `dt_target`.
    pub fn steps_per_sample(&self, dt_target: f64) -> usize {
        ((self.interval / dt_target) * (1.0 - 1e-12))
            .ceil()
            .max(1.0) as usize
    }

    /// Finest stepping any run of `config` will use.
    pub fn sweep_steps_per_sample(&self, config: &SweepConfig) -> usize {
        config
            .epsilon_list
            .iter()
            .map(|&e| self.steps_per_sample(config.target_dt(e)))
            .max()
            .unwrap_or(1)
    }
}

/// Incompressible Euler trajectory from the base flow, sampled on a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerReference {
    pub times: Vec<f64>,
    pub velocities: Vec<VectorField>,
    pub dt: f64,
}

impl EulerReference {
    pub fn compute(v0: &VectorField, plan: &SamplingPlan, steps_per_sample: usize) -> Self {
        let dt = plan.interval / steps_per_sample as f64;
        let mut integ = Integrator::new(Scheme::Rk4, MaOptions::default());
        let mut state = FlowState::incompressible(v0.clone());
        let mut times = vec![0.0];
        let mut velocities = vec![v0.clone()];
        for k in 1..=plan.samples {
            for _ in 0..steps_per_sample {
                state = integ
                    .step(&state, dt)
                    .expect("incompressible steps cannot be rejected");
            }
            state.t = plan.time(k);
            times.push(state.t);
            velocities.push(state.v.clone());
        }
        Self {
            times,
            velocities,
            dt,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn base_at(&self, k: usize) -> BaseFlow {
        BaseFlow::from_velocity(self.velocities[k].clone())
    }
}

/// Diagnostics of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSample {
    pub t: f64,
    /// `‖v − v̄‖_{H^s}`.
    pub err_v_hs: f64,
    /// `‖ρ − 1‖_{H^{s−1}}`.
    pub err_rho_hs: f64,
    pub energy: f64,
    pub momentum: [f64; 2],
    /// `H^{s−1}` norms of the perturbation variables.
    pub norm_omega1: f64,
    pub norm_beta1: f64,
    pub norm_rhotilde1: f64,
    /// `H^{s−1}` norms of the phase-filtered pair.
    pub norm_filtered_beta: f64,
    pub norm_filtered_rho: f64,
    /// L² norm of the gradient part of `v`.
    pub norm_potential_part: f64,
}

impl RunSample {
    pub const COLUMNS: [&'static str; 12] = [
        "t",
        "err_v_hs",
        "err_rho_hs",
        "energy",
        "momentum_x",
        "momentum_y",
        "norm_omega1",
        "norm_beta1",
        "norm_rhotilde1",
        "norm_filtered_beta",
        "norm_filtered_rho",
        "norm_potential_part",
    ];

    pub fn to_row(&self) -> [f64; 12] {
        [
            self.t,
            self.err_v_hs,
            self.err_rho_hs,
            self.energy,
            self.momentum[0],
            self.momentum[1],
            self.norm_omega1,
            self.norm_beta1,
            self.norm_rhotilde1,
            self.norm_filtered_beta,
            self.norm_filtered_rho,
            self.norm_potential_part,
        ]
    }

    pub fn from_row(row: [f64; 12]) -> Self {
        Self {
            t: row[0],
            err_v_hs: row[1],
            err_rho_hs: row[2],
            energy: row[3],
            momentum: [row[4], row[5]],
            norm_omega1: row[6],
            norm_beta1: row[7],
            norm_rhotilde1: row[8],
            norm_filtered_beta: row[9],
            norm_filtered_rho: row[10],
            norm_potential_part: row[11],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_row().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Complete,
    /// The run stopped early; the samples up to `t` are valid.
    Aborted {
        t: f64,
        reason: String,
    },
}

/// Time series of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub eps: f64,
    pub coupling: Coupling,
    pub seed: u64,
    pub dt: f64,
    pub samples: Vec<RunSample>,
    pub status: RunStatus,
    /// Full states at the sample times, when requested.
    pub snapshots: Vec<FlowState>,
}

impl RunRecord {
    pub fn is_complete(&self) -> bool {
        self.status == RunStatus::Complete
    }

    pub fn sup_err_v(&self) -> f64 {
        self.samples.iter().map(|s| s.err_v_hs).fold(0.0, f64::max)
    }

    pub fn sup_err_rho(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.err_rho_hs)
            .fold(0.0, f64::max)
    }
}

/// Per-run switches of [`run_simulation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub scaling: Scaling,
    pub keep_snapshots: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            scaling: Scaling::WellPrepared,
            keep_snapshots: false,
        }
    }
}

fn diagnostics(
    state: &FlowState,
    base: &BaseFlow,
    s: f64,
    scaling: Scaling,
    integ: &mut Integrator,
) -> Result<RunSample, FlowError> {
    let u = match scaling {
        Scaling::WellPrepared => perturbation_from_primitive(state, base),
        Scaling::NonPrepared => nonprepared_variables(state),
    };
    let (fb, fr) = oscillation_filter(&u, state.t);
    Ok(RunSample {
        t: state.t,
        err_v_hs: hs_norm_vector(&(&state.v - &base.v), s),
        err_rho_hs: hs_norm(&state.rho.add_constant(-1.0), s - 1.0),
        energy: integ.energy(state)?,
        momentum: momentum(state),
        norm_omega1: hs_norm(&u.omega1, s - 1.0),
        norm_beta1: hs_norm(&u.beta1, s - 1.0),
        norm_rhotilde1: hs_norm(&u.rho1, s - 1.0),
        norm_filtered_beta: hs_norm(&fb, s - 1.0),
        norm_filtered_rho: hs_norm(&fr, s - 1.0),
        norm_potential_part: helmholtz(&state.v).potential.l2_norm(),
    })
}

/// Advances over one sample interval, halving the step after a rejection.
fn advance(
    integ: &mut Integrator,
    start: &FlowState,
    interval: f64,
    steps: usize,
) -> Result<FlowState, FlowError> {
    let mut steps = steps;
    let mut halvings = 0;
    loop {
        let dt = interval / steps as f64;
        let mut state = start.clone();
        let mut failure = None;
        for _ in 0..steps {
            match integ.step(&state, dt) {
                Ok(next) => state = next,
                Err(e) => {
                    failure = Some(e);
                    break;
                }
            }
        }
        match failure {
            None => {
                state.t = start.t + interval;
                return Ok(state);
            }
            Some(FlowError::StepRejected { t, reason }) if halvings < MAX_STEP_HALVINGS => {
                log::warn!("step rejected at t = {t} ({reason}); halving dt");
                halvings += 1;
                steps *= 2;
            }
            Some(e) => return Err(e),
        }
    }
}

/// Evolves `ic` to the configured final time, recording diagnostics on the
/// sweep's sampling plan.
///
/// Errors are measured against the incompressible Euler trajectory from `base`
/// (`reference`, computed here when absent); for the Euler coupling itself they
/// are measured against `base` directly. A rejected step that survives the
/// retries ends the run early with [`RunStatus::Aborted`].
pub fn run_simulation(
    config: &SweepConfig,
    ic: FlowState,
    base: &BaseFlow,
    reference: Option<&EulerReference>,
    options: RunOptions,
) -> Result<RunRecord, ExperimentError> {
    config.validate()?;
    base.v.x.check_grid(&ic.rho)?;
    if ic.grid().n() != config.grid_n {
        return Err(ExperimentError::InvalidConfig {
            field: "grid_n",
            message: format!(
                "initial data has n = {}, config has {}",
                ic.grid().n(),
                config.grid_n
            ),
        });
    }
    let plan = SamplingPlan::for_config(config);
    let target = if ic.coupling == Coupling::Euler {
        config.dt.unwrap_or(2e-3)
    } else {
        config.target_dt(ic.eps)
    };
    let steps = plan.steps_per_sample(target);
    let dt = plan.interval / steps as f64;

    let owned;
    let reference = match (ic.coupling, reference) {
        (Coupling::Euler, _) => None,
        (_, Some(r)) => Some(r),
        (_, None) => {
            owned = EulerReference::compute(&base.v, &plan, steps);
            Some(&owned)
        }
    };
    if let Some(r) = reference {
        if r.len() != plan.samples + 1 {
            return Err(ExperimentError::InvalidConfig {
                field: "sample_cadence",
                message: "reference trajectory uses a different sampling plan".into(),
            });
        }
    }
    let base_at = |k: usize| match reference {
        Some(r) => r.base_at(k),
        None => base.clone(),
    };

    let s = config.sobolev_s;
    let mut integ = Integrator::new(config.dt_policy, config.ma_options());
    let mut record = RunRecord {
        eps: ic.eps,
        coupling: ic.coupling,
        seed: config.seed,
        dt,
        samples: Vec::with_capacity(plan.samples + 1),
        status: RunStatus::Complete,
        snapshots: Vec::new(),
    };
    let mut state = ic;
    state.t = 0.0;
    for k in 0..=plan.samples {
        if k > 0 {
            match advance(&mut integ, &state, plan.interval, steps) {
                Ok(next) => state = next,
                Err(e) => {
                    log::error!("eps = {}: run aborted: {e}", record.eps);
                    record.status = RunStatus::Aborted {
                        t: state.t,
                        reason: e.to_string(),
                    };
                    break;
                }
            }
            state.t = plan.time(k);
        }
        match diagnostics(&state, &base_at(k), s, options.scaling, &mut integ) {
            Ok(sample) => record.samples.push(sample),
            Err(e) => {
                record.status = RunStatus::Aborted {
                    t: state.t,
                    reason: e.to_string(),
                };
                break;
            }
        }
        if options.keep_snapshots {
            record.snapshots.push(state.clone());
        }
    }
    if integ.max_mass_drift() > 0.0 {
        log::debug!(
            "eps = {}: largest mass drift {:e}",
            record.eps,
            integ.max_mass_drift()
        );
    }
    Ok(record)
}
