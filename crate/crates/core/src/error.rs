use thiserror::Error;

pub type Result<T> = std::result::Result<T, DimError>;

#[derive(Debug, Error)]
pub enum DimError {
    #[error("empty point set")]
    EmptyPointSet,

    #[error("dimension mismatch: expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate {value} on axis {axis}")]
    NonFinite { axis: usize, value: f64 },

    #[error("invalid epsilon {0}: must be finite and > 0")]
    InvalidEpsilon(f64),

    #[error("invalid scale schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("orbit diverged at step {step}")]
    OrbitDiverged { step: usize },

    #[error("map {index} is not a contraction (operator norm {norm})")]
    NonContractive { index: usize, norm: f64 },

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("volume estimator limited to d <= 3 (got d = {0})")]
    VolumeDimensionTooHigh(usize),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("mismatched schedules: {0}")]
    MismatchedSchedules(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl DimError {
    /// Numerical failures (divergence, degenerate fits) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            DimError::OrbitDiverged { .. } | DimError::DegenerateFit(_)
        )
    }
}
