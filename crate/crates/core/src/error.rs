use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid dimensions {height}x{width}: both sides must be at least 2")]
    InvalidDimension { height: usize, width: usize },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("spectrum is not Hermitian: imaginary residual {residual:e} exceeds 1e-6 of real scale {scale:e}")]
    SymmetryViolation { residual: f64, scale: f64 },
    #[error("insufficient data: {usable} usable bins, need at least {required}")]
    InsufficientData { usable: usize, required: usize },
    #[error("brute-force DFT limited to {limit} bins per channel, got {bins}")]
    OracleSize { bins: usize, limit: usize },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("timestep {t} outside [{min}, {max}]")]
    InvalidTimestep { t: usize, min: usize, max: usize },
    #[error("step order violated: t_prev {t_prev} must be below t {t}")]
    InvalidStepOrder { t: usize, t_prev: usize },
    #[error("hook at step {step} returned shape {got}, expected {expected}")]
    HookContract { step: usize, expected: String, got: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("side {side} too small, need at least {required}")]
    TooSmall { side: usize, required: usize },
    #[error("condition component out of band: {0}")]
    ConditionBand(String),
}
