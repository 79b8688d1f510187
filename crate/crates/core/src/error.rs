use thiserror::Error;

/// Errors reported by the simulation and optimization routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Bloch vector norm {norm} exceeds 1")]
    BlochNormExceeded { norm: f64 },
    #[error("amplitude {amplitude} exceeds the control bound {bound}")]
    AmplitudeOutOfBounds { amplitude: f64, bound: f64 },
    #[error("segment duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("pulse must contain at least one segment")]
    EmptyPulse,
    #[error("control grid must contain at least one interval")]
    EmptyGrid,
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("time {t} lies outside the trajectory horizon [0, {horizon}]")]
    OutsideHorizon { t: f64, horizon: f64 },
    #[error("trajectory horizon {horizon} is shorter than the pulse duration {duration}")]
    HorizonTooShort { horizon: f64, duration: f64 },
    #[error("jump times must be strictly increasing and lie in [0, horizon)")]
    InvalidJumpTimes,
    #[error("need at least two trajectories to estimate a standard error, got {0}")]
    TooFewTrajectories(usize),
    #[error("target duration {target} is shorter than the pulse duration {duration}")]
    PaddingTooShort { target: f64, duration: f64 },
    #[error("parameter grid for the sweep is empty")]
    EmptySweep,
    #[error("unsupported pulse file version {0}")]
    UnsupportedVersion(u32),
    #[error("pulse file field mismatch: {0}")]
    InconsistentPulseFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed pulse file: {0}")]
    Malformed(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
