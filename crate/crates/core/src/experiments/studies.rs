use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::config::SweepConfig;
use super::fit::{fit_or_flag, RateFit};
use super::ic::{make_base_flow, make_nonprepared_ic, make_well_prepared_ic};
use super::run::{run_simulation, EulerReference, RunOptions, RunRecord, SamplingPlan};
use crate::error::ExperimentError;
use crate::flow::{nonprepared_variables, oscillation_filter, Coupling, Scaling};
use crate::spectral::{
    divergence, helmholtz, hs_norm, hs_norm_vector, leray_projection, PeriodicGrid, ScalarField,
    VectorField,
};

/// Tolerance bands used to judge the studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub velocity_slope: (f64, f64),
    pub density_slope: (f64, f64),
    pub gap_velocity_slope: (f64, f64),
    pub gap_density_slope: (f64, f64),
    /// Largest admissible max/min ratio of an ε-uniform bound.
    pub bound_ratio: f64,
    /// Required reduction of the projected-velocity error over the sweep.
    pub leray_reduction: f64,
    /// Required ratio of window-averaged to peak potential-part norm.
    pub averaging_reduction: f64,
    /// Relative tolerance on the dominant oscillation frequency.
    pub frequency_tolerance: f64,
    /// Periods of the fast oscillation needed within the run to measure it.
    pub min_periods: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            velocity_slope: (0.8, 1.2),
            density_slope: (1.7, 2.3),
            gap_velocity_slope: (1.6, 2.4),
            gap_density_slope: (2.5, 3.5),
            bound_ratio: 3.0,
            leray_reduction: 0.5,
            averaging_reduction: 1.0 / 3.0,
            frequency_tolerance: 0.2,
            min_periods: 3.0,
        }
    }
}

fn ratio_max_min(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn require_epsilons(config: &SweepConfig, needed: usize) -> Result<(), ExperimentError> {
    config.validate()?;
    if config.epsilon_list.len() < needed {
        return Err(ExperimentError::TooFewEpsilons {
            needed,
            got: config.epsilon_list.len(),
        });
    }
    Ok(())
}

fn sweep_setup(config: &SweepConfig) -> Result<(PeriodicGrid, SamplingPlan), ExperimentError> {
    let grid = PeriodicGrid::new(config.grid_n)?;
    Ok((grid, SamplingPlan::for_config(config)))
}

/// Outcome of a well-prepared ε-sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub coupling: Coupling,
    /// Fit of `sup_t ‖v^ε − v̄‖_{H^s}`.
    pub velocity: RateFit,
    /// Fit of `sup_t ‖ρ^ε − 1‖_{H^{s−1}}`.
    pub density: RateFit,
    /// Max/min over ε of `ε^{-1} sup_t ‖v^ε − v̄‖_{H^s}`.
    pub velocity_bound_ratio: f64,
    /// Max/min over ε of `ε^{-2} sup_t ‖ρ^ε − 1‖_{H^{s−1}}`.
    pub density_bound_ratio: f64,
    pub records: Vec<RunRecord>,
}

impl ConvergenceReport {
    pub fn all_complete(&self) -> bool {
        self.records.iter().all(RunRecord::is_complete)
    }

    pub fn passes(&self, th: &Thresholds) -> bool {
        self.all_complete()
            && self
                .velocity
                .slope_within(th.velocity_slope.0, th.velocity_slope.1)
            && self
                .density
                .slope_within(th.density_slope.0, th.density_slope.1)
            && self.velocity_bound_ratio <= th.bound_ratio
            && self.density_bound_ratio <= th.bound_ratio
    }
}

/// Runs the configured sweep with well-prepared data for one coupling.
pub fn convergence_study(
    config: &SweepConfig,
    coupling: Coupling,
) -> Result<ConvergenceReport, ExperimentError> {
    require_epsilons(config, 3)?;
    let (grid, plan) = sweep_setup(config)?;
    let base = make_base_flow(config.base_flow, &grid, config.base_speed);
    let reference = EulerReference::compute(&base.v, &plan, plan.sweep_steps_per_sample(config));
    let mut records = Vec::new();
    for &eps in &config.epsilon_list {
        let ic = make_well_prepared_ic(
            &base,
            eps,
            config.seed,
            config.amplitude,
            config.sobolev_s,
            coupling,
        );
        let record = run_simulation(config, ic, &base, Some(&reference), RunOptions::default())?;
        log::info!(
            "{coupling} eps = {eps}: sup velocity error {:e}, sup density error {:e}",
            record.sup_err_v(),
            record.sup_err_rho()
        );
        records.push(record);
    }
    let complete: Vec<&RunRecord> = records.iter().filter(|r| r.is_complete()).collect();
    let vel: Vec<(f64, f64)> = complete.iter().map(|r| (r.eps, r.sup_err_v())).collect();
    let den: Vec<(f64, f64)> = complete.iter().map(|r| (r.eps, r.sup_err_rho())).collect();
    Ok(ConvergenceReport {
        coupling,
        velocity: fit_or_flag("velocity", &vel),
        density: fit_or_flag("density", &den),
        velocity_bound_ratio: ratio_max_min(vel.iter().map(|(e, v)| v / e)),
        density_bound_ratio: ratio_max_min(den.iter().map(|(e, v)| v / (e * e))),
        records,
    })
}

/// Distance between the Euler-Poisson and Euler-Monge-Ampère solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// Fit of `sup_t ‖v_EP − v_EMA‖_{H^s}`.
    pub velocity: RateFit,
    /// Fit of `sup_t ‖ρ_EP − ρ_EMA‖_{H^{s−1}}`.
    pub density: RateFit,
    /// `(ε, velocity gap / sup_t ‖v_EP − v̄‖_{H^s})`.
    pub euler_ratios: Vec<(f64, f64)>,
    pub ep_records: Vec<RunRecord>,
    pub ema_records: Vec<RunRecord>,
}

impl GapReport {
    pub fn all_complete(&self) -> bool {
        self.ep_records
            .iter()
            .chain(&self.ema_records)
            .all(RunRecord::is_complete)
    }

    /// Gap ratio strictly decreasing as ε decreases.
    pub fn ratios_decreasing(&self) -> bool {
        self.euler_ratios.windows(2).all(|w| w[1].1 < w[0].1)
    }

    pub fn passes(&self, th: &Thresholds) -> bool {
        self.all_complete()
            && self
                .velocity
                .slope_within(th.gap_velocity_slope.0, th.gap_velocity_slope.1)
            && self
                .density
                .slope_within(th.gap_density_slope.0, th.gap_density_slope.1)
            && self.ratios_decreasing()
    }
}

/// Feeds identical well-prepared data to both couplings for every ε.
pub fn ep_ema_gap_study(config: &SweepConfig) -> Result<GapReport, ExperimentError> {
    require_epsilons(config, 3)?;
    let (grid, plan) = sweep_setup(config)?;
    let base = make_base_flow(config.base_flow, &grid, config.base_speed);
    let reference = EulerReference::compute(&base.v, &plan, plan.sweep_steps_per_sample(config));
    let options = RunOptions {
        scaling: Scaling::WellPrepared,
        keep_snapshots: true,
    };
    let s = config.sobolev_s;
    let mut vel = Vec::new();
    let mut den = Vec::new();
    let mut ratios = Vec::new();
    let mut ep_records = Vec::new();
    let mut ema_records = Vec::new();
    for &eps in &config.epsilon_list {
        let ic = make_well_prepared_ic(
            &base,
            eps,
            config.seed,
            config.amplitude,
            s,
            Coupling::Poisson,
        );
        let ep = run_simulation(config, ic.clone(), &base, Some(&reference), options)?;
        let ema = run_simulation(
            config,
            ic.with_coupling(Coupling::MongeAmpere),
            &base,
            Some(&reference),
            options,
        )?;
        if ep.is_complete() && ema.is_complete() {
            let mut gv = 0.0f64;
            let mut gr = 0.0f64;
            for (a, b) in ep.snapshots.iter().zip(&ema.snapshots) {
                gv = gv.max(hs_norm_vector(&(&a.v - &b.v), s));
                gr = gr.max(hs_norm(&(&a.rho - &b.rho), s - 1.0));
            }
            log::info!("eps = {eps}: velocity gap {gv:e}, density gap {gr:e}");
            vel.push((eps, gv));
            den.push((eps, gr));
            ratios.push((eps, gv / ep.sup_err_v()));
        }
        ep_records.push(strip(ep));
        ema_records.push(strip(ema));
    }
    Ok(GapReport {
        velocity: fit_or_flag("velocity_gap", &vel),
        density: fit_or_flag("density_gap", &den),
        euler_ratios: ratios,
        ep_records,
        ema_records,
    })
}

fn strip(mut r: RunRecord) -> RunRecord {
    r.snapshots = Vec::new();
    r
}

/// Non-prepared diagnostics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct NonPreparedEntry {
    pub eps: f64,
    /// `sup_t (‖ε^{-1}(ρ − 1)‖²_{H^{s−1}} + ‖v‖²_{H^s})^{1/2}`.
    pub sup_bound: f64,
    /// `sup_t ‖Πv^ε − v̄‖_{H^{s−1}}`.
    pub sup_leray_error: f64,
    /// Largest L² norm of the potential part averaged over a sliding window.
    pub window_average_potential: f64,
    /// Largest instantaneous L² norm of the potential part.
    pub peak_potential: f64,
    /// Dominant frequency of `t ↦ ∫|div v|²`, when the run covers enough periods.
    pub dominant_frequency: Option<f64>,
    /// Linear-theory frequency `1/(πε)` of the squared signal.
    pub expected_frequency: f64,
    /// Time variation of the filtered pair per unit time.
    pub filtered_variation: f64,
    pub record: RunRecord,
}

impl NonPreparedEntry {
    pub fn frequency_error(&self) -> Option<f64> {
        self.dominant_frequency
            .map(|f| (f - self.expected_frequency).abs() / self.expected_frequency)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonPreparedReport {
    pub coupling: Coupling,
    /// Window width used for the averages.
    pub window: f64,
    pub entries: Vec<NonPreparedEntry>,
    pub bound_ratio: f64,
    pub variation_ratio: f64,
}

impl NonPreparedReport {
    pub fn all_complete(&self) -> bool {
        self.entries.iter().all(|e| e.record.is_complete())
    }

    /// Projected-velocity error decreases along the sweep and the last value is
    /// at most `reduction` times the first.
    pub fn leray_converges(&self, reduction: f64) -> bool {
        let errs: Vec<f64> = self.entries.iter().map(|e| e.sup_leray_error).collect();
        errs.windows(2).all(|w| w[1] < w[0])
            && match (errs.first(), errs.last()) {
                (Some(a), Some(b)) if errs.len() > 1 => *b <= reduction * a,
                _ => false,
            }
    }

    /// Averaging at the smallest ε removes the oscillation.
    pub fn averaging_cancels(&self, reduction: f64) -> bool {
        self.entries
            .last()
            .is_some_and(|e| e.window_average_potential <= reduction * e.peak_potential)
    }

    /// Every resolvable frequency within the relative tolerance, and at least one resolvable.
    pub fn frequencies_match(&self, tol: f64) -> bool {
        let errs: Vec<f64> = self
            .entries
            .iter()
            .filter_map(|e| e.frequency_error())
            .collect();
        !errs.is_empty() && errs.iter().all(|&e| e <= tol)
    }

    pub fn passes(&self, th: &Thresholds) -> bool {
        self.all_complete()
            && self.leray_converges(th.leray_reduction)
            && self.averaging_cancels(th.averaging_reduction)
            && self.frequencies_match(th.frequency_tolerance)
            && self.bound_ratio <= th.bound_ratio
            && self.variation_ratio <= th.bound_ratio
    }
}

/// Dominant frequency of a uniformly sampled signal: mean removed, Hann
/// window, zero padding and a parabolic refinement of the peak bin.
pub fn dominant_frequency(series: &[f64], interval: f64) -> Option<f64> {
    let n = series.len();
    if n < 4 {
        return None;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let padded = (8 * n).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); padded];
    for (k, &x) in series.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos();
        buf[k] = Complex64::new((x - mean) * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let mags: Vec<f64> = buf[..padded / 2].iter().map(|c| c.norm()).collect();
    let (peak, _) = mags
        .iter()
        .enumerate()
        .skip(1)
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &m)| if m > acc.1 { (i, m) } else { acc },
        );
    if peak == 0 {
        return None;
    }
    let mut offset = 0.0;
    if peak + 1 < mags.len() {
        let (a, b, c) = (mags[peak - 1], mags[peak], mags[peak + 1]);
        let denom = a - 2.0 * b + c;
        if denom != 0.0 {
            offset = 0.5 * (a - c) / denom;
        }
    }
    Some((peak as f64 + offset) / (padded as f64 * interval))
}

/// Largest L² norm of window averages of a vector-field series (trapezoidal rule).
fn max_window_average(fields: &[VectorField], width: usize) -> f64 {
    if fields.is_empty() {
        return 0.0;
    }
    let width = width.clamp(1, fields.len() - 1).max(1);
    let mut best = 0.0f64;
    for start in 0..fields.len().saturating_sub(width) {
        let mut acc = fields[start].scale(0.5).axpy(0.5, &fields[start + width]);
        for f in &fields[start + 1..start + width] {
            acc = acc.axpy(1.0, f);
        }
        best = best.max(acc.scale(1.0 / width as f64).l2_norm());
    }
    best
}

/// Runs generic (non-prepared) data across the sweep for one coupling.
///
/// The reference Euler flow starts from the projected initial velocity, which
/// is the same for every ε. Averages use a sliding window of half the run.
pub fn nonprepared_study(
    config: &SweepConfig,
    coupling: Coupling,
) -> Result<NonPreparedReport, ExperimentError> {
    require_epsilons(config, 2)?;
    let (grid, plan) = sweep_setup(config)?;
    let s = config.sobolev_s;
    let probe = make_nonprepared_ic(&grid, config.smallest_epsilon(), config.seed, coupling);
    let base = crate::flow::BaseFlow::from_velocity(leray_projection(&probe.v));
    let reference = EulerReference::compute(&base.v, &plan, plan.sweep_steps_per_sample(config));
    let options = RunOptions {
        scaling: Scaling::NonPrepared,
        keep_snapshots: true,
    };
    let window = 0.5 * plan.final_time();
    let width = (window / plan.interval).round() as usize;

    let mut entries = Vec::new();
    for &eps in &config.epsilon_list {
        let ic = make_nonprepared_ic(&grid, eps, config.seed, coupling);
        let record = run_simulation(config, ic, &base, Some(&reference), options)?;
        let mut sup_bound = 0.0f64;
        let mut sup_leray = 0.0f64;
        let mut peak = 0.0f64;
        let mut potentials = Vec::with_capacity(record.snapshots.len());
        let mut beta_sq = Vec::with_capacity(record.snapshots.len());
        let mut filtered: Vec<(ScalarField, ScalarField)> = Vec::new();
        for (k, state) in record.snapshots.iter().enumerate() {
            let rho1 = state.rho.add_constant(-1.0).scale(1.0 / eps);
            let bound =
                (hs_norm(&rho1, s - 1.0).powi(2) + hs_norm_vector(&state.v, s).powi(2)).sqrt();
            sup_bound = sup_bound.max(bound);
            let parts = helmholtz(&state.v);
            let projected = parts.solenoidal.add_constant(parts.mean);
            sup_leray = sup_leray.max(hs_norm_vector(
                &(&projected - &reference.velocities[k]),
                s - 1.0,
            ));
            peak = peak.max(parts.potential.l2_norm());
            potentials.push(parts.potential);
            let beta = divergence(&state.v);
            beta_sq.push(beta.inner(&beta));
            filtered.push(oscillation_filter(&nonprepared_variables(state), state.t));
        }
        let mut variation = 0.0;
        for w in filtered.windows(2) {
            let db = &w[1].0 - &w[0].0;
            let dr = &w[1].1 - &w[0].1;
            variation += (db.inner(&db) + dr.inner(&dr)).sqrt();
        }
        let elapsed = record.snapshots.last().map_or(0.0, |s| s.t);
        let expected = 1.0 / (std::f64::consts::PI * eps);
        let resolvable = elapsed * expected >= Thresholds::default().min_periods;
        let entry = NonPreparedEntry {
            eps,
            sup_bound,
            sup_leray_error: sup_leray,
            window_average_potential: max_window_average(&potentials, width),
            peak_potential: peak,
            dominant_frequency: if resolvable {
                dominant_frequency(&beta_sq, plan.interval)
            } else {
                None
            },
            expected_frequency: expected,
            filtered_variation: if elapsed > 0.0 {
                variation / elapsed
            } else {
                0.0
            },
            record: strip(record),
        };
        log::info!(
            "{coupling} eps = {eps}: leray error {:e}, averaged potential {:e} (peak {:e}), frequency {:?} (expected {:.3})",
            entry.sup_leray_error,
            entry.window_average_potential,
            entry.peak_potential,
            entry.dominant_frequency,
            entry.expected_frequency
        );
        entries.push(entry);
    }
    Ok(NonPreparedReport {
        coupling,
        window,
        bound_ratio: ratio_max_min(entries.iter().map(|e| e.sup_bound)),
        variation_ratio: ratio_max_min(entries.iter().map(|e| e.filtered_variation)),
        entries,
    })
}
