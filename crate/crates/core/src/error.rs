use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("E_J/E_C = {ratio} is outside the transmon regime (need >= {min})")]
    TransmonRegime { ratio: f64, min: f64 },

    #[error("level frequencies must satisfy 0 < omega1 < omega2 (got {omega1}, {omega2})")]
    LevelOrdering { omega1: f64, omega2: f64 },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("sampling step {dt} is too coarse for pulse width {sigma}")]
    Undersampled { dt: f64, sigma: f64 },

    #[error("step {step} exceeds the resolution limit {limit}")]
    Resolution { step: f64, limit: f64 },

    #[error("integration failed: norm drift {drift:e} exceeds {limit:e}")]
    IntegrationFailure { drift: f64, limit: f64 },

    #[error("state is not normalized (norm {norm})")]
    Normalization { norm: f64 },

    #[error("threshold never reached; maximum attained fraction {max_fraction}")]
    NotCharged { max_fraction: f64 },

    #[error("charging time must be positive")]
    ZeroChargingTime,

    #[error("invalid probability distribution: {0}")]
    Distribution(String),

    #[error("classifier training failed: {0}")]
    Training(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
