//! Periodic Monge-Ampère solver: `det D²ψ = ρ` with `ψ = |x|²/2 + φ`, `φ` periodic.
//!
//! The discrete problem is posed on the two-thirds band: the determinant is
//! truncated after the grid product and the unknown `φ` is kept band-limited, so
//! the Newton Jacobian `δ ↦ P[M^{ij} ∂_{ij} δ]` coincides with the divergence
//! form `P[∂_i(M^{ij} ∂_j δ)]` and is symmetric negative definite on zero-mean
//! band-limited fields. Linear solves use conjugate gradients preconditioned by
//! the inverse Laplacian.

use rustfft::num_complex::Complex64;

use crate::error::{MaError, SpectralError};
use crate::spectral::{
    dealias, dealias_spectrum, derivative_spectrum, hs_norm, interpolate, laplacian, MultiIndex,
    ScalarField, Spectrum, MEAN_TOLERANCE,
};

/// Zero-mean periodic part `φ` of a convex potential `ψ = |x|²/2 + φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPotential {
    phi: ScalarField,
}

impl ConvexPotential {
    /// Wraps `φ`, removing its mean (the additive constant is a gauge).
    pub fn new(phi: ScalarField) -> Self {
        let mean = phi.mean();
        Self {
            phi: phi.add_constant(-mean),
        }
    }

    pub fn zero(grid: &crate::spectral::PeriodicGrid) -> Self {
        Self {
            phi: ScalarField::zeros(grid),
        }
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn into_phi(self) -> ScalarField {
        self.phi
    }

    pub fn hessian(&self) -> HessianField {
        HessianField::of(&self.phi)
    }

    /// Smallest eigenvalue of `I + D²φ` over all nodes.
    pub fn min_eigenvalue(&self) -> f64 {
        self.hessian().min_eigenvalue()
    }
}

/// Second derivatives `φ_xx, φ_xy, φ_yy` of a periodic potential.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianField {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yy: ScalarField,
}

impl HessianField {
    pub fn of(phi: &ScalarField) -> Self {
        Self::of_spectrum(&phi.spectrum())
    }

    fn of_spectrum(s: &Spectrum) -> Self {
        Self {
            xx: derivative_spectrum(s, MultiIndex(2, 0)).to_field(),
            xy: derivative_spectrum(s, MultiIndex(1, 1)).to_field(),
            yy: derivative_spectrum(s, MultiIndex(0, 2)).to_field(),
        }
    }

    /// Pointwise `det(I + D²φ)` on the grid, before truncation.
    pub fn det_identity_plus(&self) -> ScalarField {
        let n = self.xx.values().len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b, c) = (
                self.xx.values()[k],
                self.xy.values()[k],
                self.yy.values()[k],
            );
            out.push((1.0 + a) * (1.0 + c) - b * b);
        }
        ScalarField::new(self.xx.grid(), out)
    }

    /// Smallest eigenvalue of `I + D²φ` over all nodes.
    pub fn min_eigenvalue(&self) -> f64 {
        let mut min = f64::INFINITY;
        for k in 0..self.xx.values().len() {
            let a = 1.0 + self.xx.values()[k];
            let b = self.xy.values()[k];
            let c = 1.0 + self.yy.values()[k];
            let half_trace = 0.5 * (a + c);
            let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            min = min.min(half_trace - radius);
        }
        min
    }
}

/// Symmetric 2×2 matrix field `[[m11, m12], [m12, m22]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    pub m11: ScalarField,
    pub m12: ScalarField,
    pub m22: ScalarField,
}

/// Cofactor matrix of `A = I + D²φ`: `[[1+φ_yy, −φ_xy], [−φ_xy, 1+φ_xx]]`.
pub fn comatrix(h: &HessianField) -> MatrixField {
    MatrixField {
        m11: h.yy.add_constant(1.0),
        m12: h.xy.scale(-1.0),
        m22: h.xx.add_constant(1.0),
    }
}

/// `P[det(I + D²φ)] − ρ`.
pub fn ma_residual(phi: &ConvexPotential, rho: &ScalarField) -> Result<ScalarField, SpectralError> {
    phi.phi().check_grid(rho)?;
    let det = dealias(&phi.hessian().det_identity_plus());
    Ok(&det - rho)
}

/// Divergence-form operator `δ ↦ P[∂_i(M^{ij} ∂_j δ)]` acting on spectra.
struct LinearizedOperator {
    m: MatrixField,
}

impl LinearizedOperator {
    fn apply(&self, delta: &Spectrum) -> Spectrum {
        let gx = derivative_spectrum(delta, MultiIndex(1, 0)).to_field();
        let gy = derivative_spectrum(delta, MultiIndex(0, 1)).to_field();
        let n = gx.values().len();
        let mut fx = vec![0.0; n];
        let mut fy = vec![0.0; n];
        let (m11, m12, m22) = (
            self.m.m11.values(),
            self.m.m12.values(),
            self.m.m22.values(),
        );
        for k in 0..n {
            let (a, b) = (gx.values()[k], gy.values()[k]);
            fx[k] = m11[k] * a + m12[k] * b;
            fy[k] = m12[k] * a + m22[k] * b;
        }
        let grid = gx.grid();
        let div =
            derivative_spectrum(&ScalarField::new(grid, fx).spectrum(), MultiIndex(1, 0)).add(
                &derivative_spectrum(&ScalarField::new(grid, fy).spectrum(), MultiIndex(0, 1)),
            );
        dealias_spectrum(&div)
    }
}

fn spectral_dot(a: &Spectrum, b: &Spectrum) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x.conj() * y).re)
        .sum()
}

fn precondition(r: &Spectrum) -> Spectrum {
    // (-Δ)^{-1} on the band; the band never touches the Nyquist bins.
    let grid = r.grid().clone();
    r.apply_real(|a, b| {
        let k1 = grid.derivative_wavenumber(a);
        let k2 = grid.derivative_wavenumber(b);
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 {
            0.0
        } else {
            1.0 / kk
        }
    })
}

/// Settings for a single linearized solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveOptions {
    /// Relative residual target.
    pub tol: f64,
    pub max_iterations: usize,
    pub lambda_floor: f64,
}

impl Default for LinearSolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iterations: 500,
            lambda_floor: 0.1,
        }
    }
}

/// Preconditioned CG for `L δ = rhs` on zero-mean band-limited fields. Returns
/// `(δ̂, iterations)`.
fn solve_linearized(
    op: &LinearizedOperator,
    rhs: &Spectrum,
    tol: f64,
    max_iterations: usize,
) -> Result<(Spectrum, usize), MaError> {
    // work with A = -L, which is positive definite
    let mut b = dealias_spectrum(rhs).scale(-1.0);
    b.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    let b_norm = spectral_dot(&b, &b).sqrt();
    let mut x = Spectrum::zeros(rhs.grid());
    if b_norm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b;
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = spectral_dot(&r, &z);
    for it in 1..=max_iterations {
        let ap = op.apply(&p).scale(-1.0);
        let pap = spectral_dot(&p, &ap);
        if pap <= 0.0 {
            return Err(MaError::NoConvergence {
                iterations: it,
                residual: spectral_dot(&r, &r).sqrt() / b_norm,
            });
        }
        let alpha = rz / pap;
        x = x.add(&p.scale(alpha));
        r = r.sub(&ap.scale(alpha));
        let res = spectral_dot(&r, &r).sqrt();
        if res <= tol * b_norm {
            return Ok((x, it));
        }
        z = precondition(&r);
        let rz_new = spectral_dot(&r, &z);
        p = z.add(&p.scale(rz_new / rz));
        rz = rz_new;
    }
    Err(MaError::NoConvergence {
        iterations: max_iterations,
        residual: spectral_dot(&r, &r).sqrt() / b_norm,
    })
}

/// Solves `Σ_ij ∂_i(M^{ij} ∂_j δ) = rhs` for the zero-mean correction `δ`,
/// where `M` is the comatrix of `I + D²φ_k`.
pub fn linearized_step(
    phi_k: &ConvexPotential,
    rhs: &ScalarField,
    options: LinearSolveOptions,
) -> Result<ScalarField, MaError> {
    phi_k.phi().check_grid(rhs)?;
    let mean = rhs.mean();
    let norm = rhs.l2_norm();
    if mean.abs() > MEAN_TOLERANCE * norm {
        return Err(SpectralError::NonZeroMean { mean, norm }.into());
    }
    let hessian = phi_k.hessian();
    let lambda = hessian.min_eigenvalue();
    if lambda < options.lambda_floor {
        return Err(MaError::EllipticityLost {
            min_eigenvalue: lambda,
            floor: options.lambda_floor,
        });
    }
    let op = LinearizedOperator {
        m: comatrix(&hessian),
    };
    let (delta, _) = solve_linearized(&op, &rhs.spectrum(), options.tol, options.max_iterations)?;
    Ok(delta.to_field())
}

/// Solver settings for [`ma_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaOptions {
    /// Target L² norm of the residual.
    pub tol: f64,
    /// Newton iteration cap (per continuation stage).
    pub max_newton: usize,
    /// Minimal admissible eigenvalue of `I + D²φ`.
    pub lambda_floor: f64,
    /// Number of stages of the continuity path, used when plain Newton fails.
    pub continuity_stages: usize,
    pub max_halvings: usize,
    pub max_linear_iterations: usize,
    /// Largest admissible `‖ρ − 1‖_{H²}`.
    pub h2_limit: f64,
}

impl Default for MaOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_newton: 30,
            lambda_floor: 0.1,
            continuity_stages: 8,
            max_halvings: 20,
            max_linear_iterations: 500,
            h2_limit: 1e5,
        }
    }
}

/// Iteration trace of one [`ma_solve`] call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaSolveReport {
    /// Accepted Newton steps over all stages.
    pub iterations: usize,
    /// Residual L² norm before the first step and after each accepted step.
    pub residual_l2: Vec<f64>,
    /// Step scale used by each accepted step.
    pub damping_used: Vec<f64>,
    /// Stages of the continuity path (0 when plain Newton succeeded).
    pub continuity_steps: usize,
    /// Conjugate-gradient iterations over all linear solves.
    pub linear_iterations: usize,
}

impl MaSolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_l2.last().copied().unwrap_or(f64::NAN)
    }
}

struct Evaluation {
    residual: ScalarField,
    norm: f64,
    hessian: HessianField,
    min_eigenvalue: f64,
}

fn evaluate(phi: &Spectrum, target: &ScalarField) -> Evaluation {
    let hessian = HessianField::of_spectrum(phi);
    let residual = &dealias(&hessian.det_identity_plus()) - target;
    let norm = residual.l2_norm();
    let min_eigenvalue = hessian.min_eigenvalue();
    Evaluation {
        residual,
        norm,
        hessian,
        min_eigenvalue,
    }
}

fn newton(
    target: &ScalarField,
    start: Spectrum,
    options: &MaOptions,
    report: &mut MaSolveReport,
) -> Result<Spectrum, MaError> {
    let mut phi = start;
    let mut eval = evaluate(&phi, target);
    report.residual_l2.push(eval.norm);
    for _ in 0..options.max_newton {
        if eval.norm <= options.tol {
            return Ok(phi);
        }
        if eval.min_eigenvalue < options.lambda_floor {
            return Err(MaError::EllipticityLost {
                min_eigenvalue: eval.min_eigenvalue,
                floor: options.lambda_floor,
            });
        }
        let op = LinearizedOperator {
            m: comatrix(&eval.hessian),
        };
        let inner_tol = (0.05 * options.tol / eval.norm).clamp(1e-13, 1e-1);
        let (delta, its) = solve_linearized(
            &op,
            &eval.residual.spectrum().scale(-1.0),
            inner_tol,
            options.max_linear_iterations,
        )?;
        report.linear_iterations += its;

        let mut step = 1.0;
        let mut accepted = None;
        let mut last_failure_elliptic = false;
        for _ in 0..=options.max_halvings {
            let trial = phi.add(&delta.scale(step));
            let trial_eval = evaluate(&trial, target);
            if trial_eval.norm < eval.norm && trial_eval.min_eigenvalue >= options.lambda_floor {
                accepted = Some((trial, trial_eval));
                break;
            }
            last_failure_elliptic = trial_eval.min_eigenvalue < options.lambda_floor;
            step *= 0.5;
        }
        match accepted {
            Some((trial, trial_eval)) => {
                phi = trial;
                eval = trial_eval;
                report.iterations += 1;
                report.damping_used.push(step);
                report.residual_l2.push(eval.norm);
            }
            None if last_failure_elliptic => {
                return Err(MaError::EllipticityLost {
                    min_eigenvalue: eval.min_eigenvalue,
                    floor: options.lambda_floor,
                })
            }
            None => {
                return Err(MaError::NoConvergence {
                    iterations: report.iterations,
                    residual: eval.norm,
                })
            }
        }
    }
    if eval.norm <= options.tol {
        Ok(phi)
    } else {
        Err(MaError::NoConvergence {
            iterations: report.iterations,
            residual: eval.norm,
        })
    }
}

/// Solves `det(I + D²φ) = ρ` starting from `φ = 0`.
pub fn ma_solve(
    rho: &ScalarField,
    options: &MaOptions,
) -> Result<(ConvexPotential, MaSolveReport), MaError> {
    ma_solve_from(rho, None, options)
}

/// As [`ma_solve`], warm-started from `guess` when given.
///
/// Plain damped Newton is tried first; if it fails the continuity path
/// `det(I + D²φ_t) = tρ + (1 − t)`, `t = 1/K, …, 1`, is followed from `φ = 0`.
pub fn ma_solve_from(
    rho: &ScalarField,
    guess: Option<&ConvexPotential>,
    options: &MaOptions,
) -> Result<(ConvexPotential, MaSolveReport), MaError> {
    let grid = rho.grid().clone();
    if let Some(g) = guess {
        g.phi().check_grid(rho)?;
    }
    let min = rho.min();
    if min.is_nan() || min <= 0.0 {
        return Err(MaError::NotPositive { min });
    }
    let mass = rho.mean();
    let target = dealias(&rho.scale(1.0 / mass));
    let deviation = hs_norm(&target.add_constant(-1.0), 2.0);
    if deviation > options.h2_limit {
        return Err(MaError::OutOfRange {
            deviation,
            limit: options.h2_limit,
        });
    }

    let start = match guess {
        Some(g) => dealias_spectrum(&g.phi().spectrum()),
        None => Spectrum::zeros(&grid),
    };
    let mut report = MaSolveReport::default();
    let direct = newton(&target, start, options, &mut report);
    let phi = match direct {
        Ok(phi) => phi,
        Err(err) => {
            log::debug!("plain Newton failed ({err}); following the continuity path");
            let stages = options.continuity_stages.max(1);
            let mut phi = Spectrum::zeros(&grid);
            for stage in 1..=stages {
                let t = stage as f64 / stages as f64;
                let stage_target = target.map(|r| t * r + (1.0 - t));
                phi = newton(&stage_target, phi, options, &mut report)?;
                report.continuity_steps += 1;
            }
            phi
        }
    };
    let mut phi = phi;
    phi.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    Ok((ConvexPotential::new(phi.to_field()), report))
}

/// `‖Δφ − (ρ − 1)‖_{H^s}`: the remainder of the linearization `Δψ − d ≈ ρ − 1`.
pub fn linearization_defect(phi: &ConvexPotential, rho: &ScalarField, s: f64) -> f64 {
    let lap = laplacian(phi.phi());
    hs_norm(&(&lap - &rho.add_constant(-1.0)), s)
}

/// `∫ f(∇ψ(x)) ρ(x) dx − ∫ f(x) dx` with `∇ψ(x) = x + ∇φ(x)`.
pub fn pushforward_defect(
    phi: &ConvexPotential,
    rho: &ScalarField,
    f: &ScalarField,
) -> Result<f64, SpectralError> {
    phi.phi().check_grid(rho)?;
    phi.phi().check_grid(f)?;
    let grid = rho.grid();
    let s = phi.phi().spectrum();
    let gx = derivative_spectrum(&s, MultiIndex(1, 0)).to_field();
    let gy = derivative_spectrum(&s, MultiIndex(0, 1)).to_field();
    let n = grid.n();
    let mut points = Vec::with_capacity(grid.len());
    for i in 0..n {
        for j in 0..n {
            let (x, y) = grid.node(i, j);
            let k = i * n + j;
            points.push((x + gx.values()[k], y + gy.values()[k]));
        }
    }
    let pulled = interpolate(&f.spectrum(), &points);
    let transported: f64 = pulled
        .iter()
        .zip(rho.values())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / grid.len() as f64;
    Ok(transported - f.mean())
}
