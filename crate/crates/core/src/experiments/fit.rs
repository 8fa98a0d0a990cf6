use crate::error::ExperimentError;

/// Errors below this are treated as round-off and not fitted.
pub const NOISE_FLOOR: f64 = 1e-11;

/// Least-squares power law `error ≈ C·ε^slope` over a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub quantity: String,
    /// `(ε, error)` pairs in sweep order.
    pub points: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    /// Why no slope was fitted.
    pub flag: Option<String>,
}

impl RateFit {
    pub fn degenerate(quantity: &str, points: &[(f64, f64)], reason: impl Into<String>) -> Self {
        Self {
            quantity: quantity.to_string(),
            points: points.to_vec(),
            slope: None,
            intercept: None,
            r2: None,
            flag: Some(reason.into()),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.slope.is_none()
    }

    /// True when a slope was fitted and lies in `[lo, hi]`.
    pub fn slope_within(&self, lo: f64, hi: f64) -> bool {
        self.slope.is_some_and(|s| (lo..=hi).contains(&s))
    }
}

/// Fits `log error = intercept + slope·log ε` by least squares.
pub fn fit_rate(quantity: &str, points: &[(f64, f64)]) -> Result<RateFit, ExperimentError> {
    if points.len() < 3 {
        return Err(ExperimentError::DegenerateFit(format!(
            "{quantity}: {} points, need at least 3",
            points.len()
        )));
    }
    if let Some(&(e, err)) = points
        .iter()
        .find(|(e, err)| !(*e > 0.0 && e.is_finite() && err.is_finite()))
    {
        return Err(ExperimentError::DegenerateFit(format!(
            "{quantity}: invalid point ({e}, {err})"
        )));
    }
    if let Some(&(e, err)) = points.iter().find(|(_, err)| *err < NOISE_FLOOR) {
        return Err(ExperimentError::DegenerateFit(format!(
            "{quantity}: error {err:e} at eps = {e} is below the noise floor"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(ExperimentError::DegenerateFit(format!(
            "{quantity}: all eps values coincide"
        )));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(RateFit {
        quantity: quantity.to_string(),
        points: points.to_vec(),
        slope: Some(slope),
        intercept: Some(intercept),
        r2: Some(r2),
        flag: None,
    })
}

/// [`fit_rate`], with degenerate inputs turned into a flagged fit.
pub fn fit_or_flag(quantity: &str, points: &[(f64, f64)]) -> RateFit {
    match fit_rate(quantity, points) {
        Ok(fit) => fit,
        Err(ExperimentError::DegenerateFit(reason)) => {
            RateFit::degenerate(quantity, points, reason)
        }
        Err(other) => RateFit::degenerate(quantity, points, other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EPS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = EPS.iter().map(|&e| (e, e * e)).collect();
        let fit = fit_rate("q", &pts).unwrap();
        assert!((fit.slope.unwrap() - 2.0).abs() < 1e-12);
        assert!((fit.r2.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_data_has_zero_slope() {
        let pts: Vec<_> = EPS.iter().map(|&e| (e, 0.3)).collect();
        let fit = fit_rate("q", &pts).unwrap();
        assert!(fit.slope.unwrap().abs() < 1e-14);
    }

    #[test]
    fn noisy_power_law_stays_in_band() {
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<_> = EPS
                .iter()
                .map(|&e| (e, e.powf(1.5) * (1.0 + rng.gen_range(-0.05..=0.05))))
                .collect();
            let slope = fit_rate("q", &pts).unwrap().slope.unwrap();
            assert!((1.3..=1.7).contains(&slope), "seed {seed}: {slope}");
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            fit_rate("q", &[(0.1, 1.0), (0.05, 0.5)]),
            Err(ExperimentError::DegenerateFit(_))
        ));
        let floor: Vec<_> = EPS.iter().map(|&e| (e, 1e-14)).collect();
        assert!(fit_rate("q", &floor).is_err());
        let flagged = fit_or_flag("q", &floor);
        assert!(flagged.is_degenerate() && flagged.flag.is_some());
        assert!(!flagged.slope_within(-10.0, 10.0));
    }
}
