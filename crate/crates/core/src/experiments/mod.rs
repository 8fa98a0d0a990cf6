//! Initial data, ε-sweeps and rate fits for the quasi-neutral limit.

mod config;
mod fit;
mod ic;
mod ma_check;
mod run;
mod studies;

pub use config::{BaseFlowKind, CouplingChoice, SweepConfig};
pub use fit::{fit_or_flag, fit_rate, RateFit, NOISE_FLOOR};
pub use ic::{
    make_base_flow, make_nonprepared_ic, make_well_prepared_ic, NONPREPARED_DENSITY,
    NONPREPARED_GRADIENT, NONPREPARED_SOLENOIDAL, PERTURBATION_BAND,
};
pub use ma_check::{defect_study, manufactured_check, ManufacturedCheck, DEFECT_AMPLITUDES};
pub use run::{
    run_simulation, EulerReference, RunOptions, RunRecord, RunSample, RunStatus, SamplingPlan,
    MAX_STEP_HALVINGS,
};
pub use studies::{
    convergence_study, dominant_frequency, ep_ema_gap_study, nonprepared_study, ConvergenceReport,
    GapReport, NonPreparedEntry, NonPreparedReport, Thresholds,
};
