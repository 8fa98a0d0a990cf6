//! `quasineutral`: runs the quasi-neutral limit experiments and writes CSV
//! results plus a `summary.json` into the output directory.

mod report;

use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quasineutral::experiments::{
    convergence_study, defect_study, ep_ema_gap_study, make_base_flow, manufactured_check,
    nonprepared_study, run_simulation, RunOptions, SweepConfig, Thresholds,
};
use quasineutral::flow::{Coupling, FlowState};
use quasineutral::io::{apply_overrides, parse_config};
use quasineutral::spectral::PeriodicGrid;

use report::Report;

/// Quasi-neutral limit experiments for Euler-Poisson and Euler-Monge-Ampère.
#[derive(Debug, Parser)]
#[command(name = "quasineutral", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file (`key = value` lines).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one configuration key; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// More logging (-v info, -vv debug, -vvv trace).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Incompressible Euler run from the configured base flow.
    Euler,
    /// Well-prepared ε-sweep with Poisson coupling.
    Ep,
    /// Well-prepared ε-sweep with Monge-Ampère coupling.
    Ema,
    /// Well-prepared ε-sweep for the configured coupling(s).
    Convergence,
    /// Distance between the Poisson and Monge-Ampère solutions over the sweep.
    Compare,
    /// Sweep with generic (non-prepared) initial data.
    Nonprepared,
    /// Monge-Ampère solver self-check on manufactured data.
    MaCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Euler => "euler",
            Command::Ep => "ep",
            Command::Ema => "ema",
            Command::Convergence => "convergence",
            Command::Compare => "compare",
            Command::Nonprepared => "nonprepared",
            Command::MaCheck => "ma-check",
        }
    }
}

type Result<T> = std::result::Result<T, Box<dyn Error>>;

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<SweepConfig> {
    let base = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            parse_config(&text).map_err(|e| format!("{}: {e}", p.display()))?
        }
        None => SweepConfig::default(),
    };
    Ok(apply_overrides(base, overrides)?)
}

fn euler(config: &SweepConfig, report: &mut Report) -> Result<()> {
    let grid = PeriodicGrid::new(config.grid_n)?;
    let base = make_base_flow(config.base_flow, &grid, config.base_speed);
    let ic = FlowState::incompressible(base.v.clone());
    let record = run_simulation(config, ic, &base, None, RunOptions::default())?;
    report.record_run(&record)?;
    Ok(())
}

fn convergence(config: &SweepConfig, couplings: &[Coupling], report: &mut Report) -> Result<()> {
    let th = Thresholds::default();
    for &coupling in couplings {
        let r = convergence_study(config, coupling)?;
        for record in &r.records {
            report.record_run(record)?;
        }
        report.record_rates(
            &format!(
                "{}_{coupling}_seed{}_rates.csv",
                report.command(),
                config.seed
            ),
            &[r.velocity.clone(), r.density.clone()],
        )?;
        report.check_slope(
            &format!("{coupling}_velocity_slope"),
            &r.velocity,
            th.velocity_slope,
        );
        report.check_slope(
            &format!("{coupling}_density_slope"),
            &r.density,
            th.density_slope,
        );
        for (name, ratio) in [
            ("velocity_bound_ratio", r.velocity_bound_ratio),
            ("density_bound_ratio", r.density_bound_ratio),
        ] {
            report.check(
                &format!("{coupling}_{name}"),
                ratio <= th.bound_ratio,
                format!("{ratio:.3}, limit {}", th.bound_ratio),
            );
        }
    }
    Ok(())
}

fn compare(config: &SweepConfig, report: &mut Report) -> Result<()> {
    let th = Thresholds::default();
    let r = ep_ema_gap_study(config)?;
    for record in r.ep_records.iter().chain(&r.ema_records) {
        report.record_run(record)?;
    }
    report.record_rates(
        &format!("compare_seed{}_rates.csv", config.seed),
        &[r.velocity.clone(), r.density.clone()],
    )?;
    report.check_slope("velocity_gap_slope", &r.velocity, th.gap_velocity_slope);
    report.check_slope("density_gap_slope", &r.density, th.gap_density_slope);
    let ratios: Vec<String> = r
        .euler_ratios
        .iter()
        .map(|(e, q)| format!("{e}: {q:.4e}"))
        .collect();
    report.check(
        "gap_to_euler_ratio_decreasing",
        r.ratios_decreasing(),
        ratios.join(", "),
    );
    Ok(())
}

fn nonprepared(config: &SweepConfig, report: &mut Report) -> Result<()> {
    let th = Thresholds::default();
    for coupling in config.coupling.couplings() {
        let r = nonprepared_study(config, coupling)?;
        for entry in &r.entries {
            report.record_run(&entry.record)?;
        }
        let leray: Vec<String> = r
            .entries
            .iter()
            .map(|e| format!("{}: {:.4e}", e.eps, e.sup_leray_error))
            .collect();
        report.check(
            &format!("{coupling}_leray_convergence"),
            r.leray_converges(th.leray_reduction),
            leray.join(", "),
        );
        let avg = r
            .entries
            .last()
            .map(|e| {
                format!(
                    "window {:.3}: average {:.4e}, peak {:.4e}",
                    r.window, e.window_average_potential, e.peak_potential
                )
            })
            .unwrap_or_default();
        report.check(
            &format!("{coupling}_oscillation_averaging"),
            r.averaging_cancels(th.averaging_reduction),
            avg,
        );
        let freqs: Vec<String> = r
            .entries
            .iter()
            .map(|e| match e.dominant_frequency {
                Some(f) => format!("{}: {f:.4} vs {:.4}", e.eps, e.expected_frequency),
                None => format!("{}: too few periods", e.eps),
            })
            .collect();
        report.check(
            &format!("{coupling}_oscillation_frequency"),
            r.frequencies_match(th.frequency_tolerance),
            freqs.join(", "),
        );
        report.check(
            &format!("{coupling}_energy_bound_ratio"),
            r.bound_ratio <= th.bound_ratio,
            format!("{:.3}, limit {}", r.bound_ratio, th.bound_ratio),
        );
        report.check(
            &format!("{coupling}_filtered_variation_ratio"),
            r.variation_ratio <= th.bound_ratio,
            format!("{:.3}, limit {}", r.variation_ratio, th.bound_ratio),
        );
    }
    Ok(())
}

fn ma_check(config: &SweepConfig, report: &mut Report) -> Result<()> {
    let grid = PeriodicGrid::new(config.grid_n)?;
    let options = config.ma_options();
    let c = manufactured_check(&grid, 0.01, &options)?;
    report.check(
        "manufactured_solution",
        c.h2_error <= 1e-8 && c.iterations <= 6,
        format!(
            "H2 error {:.3e}, {} Newton iterations, residual {:.3e}",
            c.h2_error, c.iterations, c.residual
        ),
    );
    let fit = defect_study(&grid, &options)?;
    report.record_rates(
        &format!("ma-check_seed{}_rates.csv", config.seed),
        std::slice::from_ref(&fit),
    )?;
    report.check_slope("linearization_defect_slope", &fit, (1.8, 2.2));
    Ok(())
}

fn execute(command: Command, config: &SweepConfig, report: &mut Report) -> Result<()> {
    match command {
        Command::Euler => euler(config, report),
        Command::Ep => convergence(config, &[Coupling::Poisson], report),
        Command::Ema => convergence(config, &[Coupling::MongeAmpere], report),
        Command::Convergence => convergence(config, &config.coupling.couplings(), report),
        Command::Compare => compare(config, report),
        Command::Nonprepared => nonprepared(config, report),
        Command::MaCheck => ma_check(config, report),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let config = match load_config(cli.config.as_deref(), &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(2);
    }

    let mut report = Report::new(cli.command.name(), &cli.out, &config);
    let outcome = execute(cli.command, &config, &mut report);
    if let Err(e) = &outcome {
        eprintln!("error: {e}");
        report.fail(e.to_string());
    }
    if let Err(e) = report.write() {
        eprintln!("error: cannot write summary: {e}");
        return ExitCode::from(2);
    }
    match (outcome, report.passed()) {
        (Err(_), _) => ExitCode::from(2),
        (Ok(()), true) => ExitCode::SUCCESS,
        (Ok(()), false) => {
            eprintln!(
                "some runs or checks failed; see {}",
                cli.out.join("summary.json").display()
            );
            ExitCode::FAILURE
        }
    }
}
