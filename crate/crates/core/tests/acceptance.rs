//! Acceptance gate: prints one PASS/FAIL line per criterion and exits non-zero
//! if any fails. Run with `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use quasineutral::experiments::{
    convergence_study, ep_ema_gap_study, fit_rate, make_base_flow, make_well_prepared_ic,
    nonprepared_study, BaseFlowKind, SweepConfig, Thresholds,
};
use quasineutral::flow::{momentum, Coupling, FlowState, Integrator, Scheme};
use quasineutral::monge_ampere::{linearization_defect, ma_solve, ConvexPotential, MaOptions};
use quasineutral::spectral::{
    curl, divergence, helmholtz, hs_norm, hs_norm_vector, laplacian, leray_projection,
    poisson_solve, velocity_from_divcurl, PeriodicGrid, ScalarField, VectorField,
};

const TAU: f64 = 2.0 * PI;

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn slope(s: Option<f64>) -> String {
    s.map_or_else(|| "unfitted".to_string(), |v| format!("{v:.3}"))
}

fn c1_manufactured() -> Outcome {
    let start = Instant::now();
    let g = PeriodicGrid::new(64).unwrap();
    let phi_star = ScalarField::from_fn(&g, |x, y| 0.01 * (TAU * x).cos() * (TAU * y).cos());
    let rho = ConvexPotential::new(phi_star.clone())
        .hessian()
        .det_identity_plus();
    let (phi, report) = match ma_solve(&rho, &MaOptions::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("solve failed: {e}")),
    };
    let elapsed = start.elapsed();
    let err = hs_norm(&(phi.phi() - &phi_star), 2.0);
    outcome(
        err <= 1e-8 && report.iterations <= 6 && elapsed < Duration::from_secs(1),
        format!(
            "H2 error {err:.2e}, {} Newton iterations, {elapsed:.2?}",
            report.iterations
        ),
    )
}

fn c2_quadratic_defect() -> Outcome {
    let start = Instant::now();
    let g = PeriodicGrid::new(64).unwrap();
    // unit-amplitude shape scaled so that |D²φ₀| ≤ 1
    let shape =
        |x: f64, y: f64| (TAU * x).cos() * (TAU * y).cos() + 0.5 * (TAU * (x + 2.0 * y)).sin();
    let raw = ScalarField::from_fn(&g, shape);
    let h = ConvexPotential::new(raw.clone()).hessian();
    let bound =
        h.xx.values()
            .iter()
            .zip(h.xy.values())
            .zip(h.yy.values())
            .map(|((a, b), c)| a.abs() + b.abs() + c.abs())
            .fold(0.0, f64::max);
    let phi0 = raw.scale(1.0 / bound);
    let opts = MaOptions {
        tol: 1e-13,
        ..MaOptions::default()
    };
    let mut points = Vec::new();
    for a in [0.04, 0.02, 0.01, 0.005] {
        let rho = ConvexPotential::new(phi0.scale(a))
            .hessian()
            .det_identity_plus();
        let (phi, _) = match ma_solve(&rho, &opts) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("solve failed at a = {a}: {e}")),
        };
        let size = hs_norm(&rho.add_constant(-1.0), 2.0);
        points.push((size, linearization_defect(&phi, &rho, 2.0)));
    }
    let elapsed = start.elapsed();
    match fit_rate("defect", &points) {
        Ok(fit) => {
            let slope = fit.slope.unwrap_or(f64::NAN);
            outcome(
                (1.8..=2.2).contains(&slope) && elapsed < Duration::from_secs(10),
                format!("slope {slope:.3}, {elapsed:.2?}"),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn sweep_config() -> SweepConfig {
    SweepConfig::default()
}

fn convergence(coupling: Coupling, budget: Duration) -> Outcome {
    let start = Instant::now();
    let th = Thresholds::default();
    match convergence_study(&sweep_config(), coupling) {
        Ok(r) => {
            let elapsed = start.elapsed();
            outcome(
                r.passes(&th) && elapsed <= budget,
                format!(
                    "velocity slope {}, density slope {}, bound ratios {:.2}/{:.2}, {elapsed:.1?}",
                    slope(r.velocity.slope),
                    slope(r.density.slope),
                    r.velocity_bound_ratio,
                    r.density_bound_ratio
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn c5_gap() -> Outcome {
    let config = SweepConfig {
        epsilon_list: vec![0.2, 0.1, 0.05],
        ..sweep_config()
    };
    match ep_ema_gap_study(&config) {
        Ok(r) => {
            let ratios: Vec<String> = r
                .euler_ratios
                .iter()
                .map(|(_, q)| format!("{q:.3e}"))
                .collect();
            outcome(
                r.passes(&Thresholds::default()),
                format!(
                    "velocity gap slope {}, density gap slope {}, gap/Euler ratios [{}]",
                    slope(r.velocity.slope),
                    slope(r.density.slope),
                    ratios.join(", ")
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn c6_nonprepared() -> Outcome {
    let th = Thresholds::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for coupling in [Coupling::Poisson, Coupling::MongeAmpere] {
        match nonprepared_study(&sweep_config(), coupling) {
            Ok(r) => {
                let first = r.entries.first().map_or(f64::NAN, |e| e.sup_leray_error);
                let last = r.entries.last();
                let avg = last.map_or(f64::NAN, |e| e.window_average_potential / e.peak_potential);
                let freqs: Vec<String> = r
                    .entries
                    .iter()
                    .filter_map(|e| {
                        e.dominant_frequency
                            .map(|f| format!("{f:.2}/{:.2}", e.expected_frequency))
                    })
                    .collect();
                let ok = r.passes(&th);
                pass &= ok;
                parts.push(format!(
                    "{coupling}: (a) Leray error {first:.2e} -> {:.2e} (b) averaged/peak {avg:.3} (c) frequency [{}]{}",
                    last.map_or(f64::NAN, |e| e.sup_leray_error),
                    freqs.join(", "),
                    if ok { "" } else { " FAILED" }
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{coupling}: {e}"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

/// Largest momentum and energy deviations from t = 0 over `[0, 0.5]`.
fn drifts(ic: &FlowState, dt: f64, ma: MaOptions) -> Result<(f64, f64), String> {
    let mut integ = Integrator::new(Scheme::Rk4, ma);
    let m0 = momentum(ic);
    let e0 = integ.energy(ic).map_err(|e| e.to_string())?;
    let mut state = ic.clone();
    let (mut dm, mut de) = (0.0f64, 0.0f64);
    for _ in 0..(0.5 / dt).round() as usize {
        state = integ.step(&state, dt).map_err(|e| e.to_string())?;
        let m = momentum(&state);
        dm = dm.max((m[0] - m0[0]).hypot(m[1] - m0[1]));
        de = de.max((integ.energy(&state).map_err(|e| e.to_string())? - e0).abs());
    }
    Ok((dm, de))
}

fn c7_conservation() -> Outcome {
    let config = sweep_config();
    let g = PeriodicGrid::new(config.grid_n).unwrap();
    let base = make_base_flow(BaseFlowKind::TaylorGreen, &g, config.base_speed);
    let ma = MaOptions {
        tol: 1e-13,
        ..MaOptions::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for coupling in [Coupling::Poisson, Coupling::MongeAmpere] {
        let ic = make_well_prepared_ic(&base, 0.1, config.seed, config.amplitude, 2.0, coupling);
        let coarse = drifts(&ic, 0.025, ma);
        let fine = drifts(&ic, 0.0125, ma);
        match (coarse, fine) {
            (Ok((m1, e1)), Ok((m2, e2))) => {
                let (rm, re) = (m1 / m2, e1 / e2);
                pass &= rm >= 12.0 && re >= 12.0;
                parts.push(format!(
                    "{coupling}: momentum ratio {rm:.1}, energy ratio {re:.1}"
                ));
            }
            (Err(e), _) | (_, Err(e)) => {
                pass = false;
                parts.push(format!("{coupling}: {e}"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn c8_spectral() -> Outcome {
    let start = Instant::now();
    let g = PeriodicGrid::new(64).unwrap();
    let f = ScalarField::from_fn(&g, |x, y| {
        (TAU * x).sin() * (TAU * 2.0 * y).cos() + 0.3 * (TAU * (3.0 * x - y)).cos() + 0.7
    });
    let h = ScalarField::from_fn(&g, |x, y| {
        (TAU * (x + y)).cos() - 0.2 * (TAU * 5.0 * y).sin() + 0.1 * (TAU * 4.0 * x).sin()
    });
    let v = VectorField::new(f.clone(), h.clone());
    let mut worst: Vec<(&str, f64, f64)> = Vec::new();

    let nodes = f.values().iter().map(|a| a * a).sum::<f64>() / g.len() as f64;
    worst.push((
        "parseval",
        (hs_norm(&f, 0.0).powi(2) - nodes).abs() / nodes,
        1e-10,
    ));

    let parts = helmholtz(&v);
    let ip = parts.solenoidal.inner(&parts.potential).abs()
        / (parts.solenoidal.l2_norm() * parts.potential.l2_norm());
    worst.push(("helmholtz orthogonality", ip, 1e-10));
    let p = leray_projection(&v);
    worst.push((
        "leray idempotence",
        (&leray_projection(&p) - &p).l2_norm() / p.l2_norm(),
        1e-13,
    ));
    worst.push(("projected divergence", divergence(&p).max_abs(), 1e-10));

    let beta = f.add_constant(-f.mean());
    let omega = h.add_constant(-h.mean());
    match velocity_from_divcurl(&beta, &omega, [0.1, -0.2]) {
        Ok(w) => {
            let err = (&divergence(&w) - &beta)
                .max_abs()
                .max((&curl(&w) - &omega).max_abs());
            worst.push(("div-curl round trip", err, 1e-10));
        }
        Err(e) => return outcome(false, e.to_string()),
    }
    match (
        poisson_solve(&beta),
        poisson_solve(&omega),
        poisson_solve(&beta.scale(2.0).axpy(-3.0, &omega)),
    ) {
        (Ok(a), Ok(b), Ok(c)) => {
            worst.push(("poisson inverse", (&laplacian(&a) - &beta).max_abs(), 1e-12));
            worst.push((
                "poisson linearity",
                (&c - &a.scale(2.0).axpy(-3.0, &b)).max_abs(),
                1e-12,
            ));
        }
        _ => return outcome(false, "poisson solve failed".into()),
    }
    let elapsed = start.elapsed();
    let failed: Vec<String> = worst
        .iter()
        .filter(|(_, err, tol)| err.is_nan() || err > tol)
        .map(|(name, err, tol)| format!("{name} {err:.1e} > {tol:.0e}"))
        .collect();
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    outcome(
        failed.is_empty() && elapsed < Duration::from_secs(5),
        if failed.is_empty() {
            format!(
                "{} properties, largest error {max:.1e}, {elapsed:.2?}",
                worst.len()
            )
        } else {
            failed.join(", ")
        },
    )
}

fn c9_taylor_green() -> Outcome {
    let g = PeriodicGrid::new(64).unwrap();
    let base = make_base_flow(BaseFlowKind::TaylorGreen, &g, 1.0);
    let mut integ = Integrator::new(Scheme::Rk4, MaOptions::default());
    let mut state = FlowState::incompressible(base.v.clone());
    for _ in 0..500 {
        state = match integ.step(&state, 1e-3) {
            Ok(s) => s,
            Err(e) => return outcome(false, e.to_string()),
        };
    }
    let err = hs_norm_vector(&(&state.v - &base.v), 2.0);
    outcome(
        err <= 1e-8,
        format!("H2 drift {err:.2e} at t = {:.3}", state.t),
    )
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        (
            "1 manufactured Monge-Ampere solution",
            Box::new(c1_manufactured),
        ),
        (
            "2 quadratic linearization defect",
            Box::new(c2_quadratic_defect),
        ),
        (
            "3 Euler-Poisson rates",
            Box::new(|| convergence(Coupling::Poisson, Duration::from_secs(300))),
        ),
        (
            "4 Euler-Monge-Ampere rates",
            Box::new(|| convergence(Coupling::MongeAmpere, Duration::from_secs(900))),
        ),
        ("5 Euler-Poisson / Euler-Monge-Ampere gap", Box::new(c5_gap)),
        ("6 non-prepared behaviour", Box::new(c6_nonprepared)),
        ("7 conservation under dt halving", Box::new(c7_conservation)),
        ("8 spectral property suite", Box::new(c8_spectral)),
        ("9 steady Taylor-Green", Box::new(c9_taylor_green)),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failures += 1;
        }
        println!(
            "criterion {name}: {} ({}; {:.1?})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
