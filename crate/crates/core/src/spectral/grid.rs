use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::SpectralError;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans_for(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Uniform grid on the unit torus `[0,1)²` with `n` nodes per axis.
///
/// Node `(i, j)` sits at `(i/n, j/n)` and is stored at flat index `i * n + j`,
/// so the first axis is `x` and the second is `y`. Spectral coefficients use the
/// same layout with FFT ordering of the integer wavenumbers.
#[derive(Clone)]
pub struct PeriodicGrid {
    n: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid").field("n", &self.n).finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for PeriodicGrid {}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self, SpectralError> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(SpectralError::InvalidResolution(n));
        }
        Ok(Self {
            n,
            plans: plans_for(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `1/n`.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Number of nodes, `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinates of node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.h(), j as f64 * self.h())
    }

    /// Signed integer wavenumber of FFT bin `a`; the Nyquist bin maps to `+n/2`.
    pub fn wavenumber(&self, a: usize) -> i64 {
        let n = self.n as i64;
        let a = a as i64;
        if a <= n / 2 {
            a
        } else {
            a - n
        }
    }

    pub fn is_nyquist(&self, a: usize) -> bool {
        a == self.n / 2
    }

    /// Largest wavenumber kept by the two-thirds rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Angular wavenumber `2πk` used by first-order derivatives; zero on the Nyquist bin.
    pub fn derivative_wavenumber(&self, a: usize) -> f64 {
        if self.is_nyquist(a) {
            0.0
        } else {
            2.0 * std::f64::consts::PI * self.wavenumber(a) as f64
        }
    }

    /// Normalised forward transform: `f(x) = Σ_k f̂_k e^{2πi k·x}`.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.len());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, true);
        let scale = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Inverse of [`forward`](Self::forward); the imaginary residue is discarded.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.len());
        let mut buf = coeffs.to_vec();
        self.transform(&mut buf, false);
        buf.into_iter().map(|c| c.re).collect()
    }

    fn transform(&self, buf: &mut [Complex64], forward: bool) {
        let fft = if forward {
            &self.plans.forward
        } else {
            &self.plans.inverse
        };
        // rows (along y), then columns via transpose
        fft.process(buf);
        transpose_in_place(buf, self.n);
        fft.process(buf);
        transpose_in_place(buf, self.n);
    }
}

fn transpose_in_place(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}
