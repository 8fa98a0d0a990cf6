use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("grid resolution must be even and at least 8, got {0}")]
    InvalidResolution(usize),
    #[error("fields live on different grids ({0} vs {1})")]
    GridMismatch(usize, usize),
    #[error("right-hand side has non-zero mean {mean:e} (L2 norm {norm:e})")]
    NonZeroMean { mean: f64, norm: f64 },
    #[error("derivative order {0} exceeds the supported maximum of 4")]
    UnsupportedOrder(u32),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaError {
    #[error("density is not positive (min {min:e})")]
    NotPositive { min: f64 },
    #[error("Monge-Ampere iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error(
        "ellipticity lost: min eigenvalue of I + D2 phi is {min_eigenvalue:e} < floor {floor:e}"
    )]
    EllipticityLost { min_eigenvalue: f64, floor: f64 },
    #[error("density too far from uniform: H2 deviation {deviation:e} exceeds {limit:e}")]
    OutOfRange { deviation: f64, limit: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("invalid flow state: {reason}")]
    InvalidState { reason: String },
    #[error("step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },
    #[error("explicit step dt = {dt:e} exceeds the stiff limit {limit:e}")]
    StiffStep { dt: f64, limit: f64 },
    #[error("operation requires {expected} coupling")]
    CouplingMismatch { expected: &'static str },
    #[error(transparent)]
    MongeAmpere(#[from] MaError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("unknown base flow kind `{0}`")]
    UnknownKind(String),
    #[error("degenerate rate fit: {0}")]
    DegenerateFit(String),
    #[error("invalid value for `{field}`: {message}")]
    InvalidConfig {
        field: &'static str,
        message: String,
    },
    #[error("study needs at least {needed} epsilon values, got {got}")]
    TooFewEpsilons { needed: usize, got: usize },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
    #[error("override `{arg}`: {message}")]
    Override { arg: String, message: String },
    #[error("malformed csv: {0}")]
    Format(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
