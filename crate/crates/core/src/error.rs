use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("all amplitudes vanish; cannot normalize a zero vector")]
    ZeroVector,
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("unsupported dimension {0}; expected 2, 3 or 4")]
    InvalidDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("probabilities sum to {0}, expected 1")]
    ProbabilityMismatch(f64),
    #[error("not a valid density matrix: {0}")]
    InvalidDensity(&'static str),
    #[error("not a valid measurement: {0}")]
    InvalidMeasurement(&'static str),
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("states are parallel (overlap {0}); unambiguous discrimination impossible")]
    ParallelStates(f64),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("inconsistent protocol flags: {0}")]
    InvalidFlags(String),
    #[error("strategy `{strategy}` cannot be used with protocol `{protocol}`")]
    IncompatibleProtocol { strategy: String, protocol: String },
    #[error("restart requested but the loss policy does not allow restarts")]
    RestartNotPermitted,
    #[error("signal lost under a protocol without a loss-handling rule")]
    UnhandledLoss,
    #[error("protocol exceeded {0} restarts")]
    RestartLimitExceeded(u64),
    #[error("{count} of {trials} trials exceeded the restart limit")]
    RestartBudgetExceeded { count: u64, trials: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
