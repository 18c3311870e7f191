use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid gain model: {0}")]
    InvalidGainModel(String),

    #[error("nu must lie strictly inside (0, 1), got {0}")]
    InvalidNu(f64),

    #[error("arm index {arm} out of range for {num_arms} arms")]
    ArmOutOfRange { arm: usize, num_arms: usize },

    #[error("need at least {required} arms, got {got}")]
    TooFewArms { required: usize, got: usize },

    #[error("feedback must be nonnegative, got {0}")]
    NegativeFeedback(f64),

    #[error("preference entries must be finite")]
    NonFinitePreference,

    #[error("invalid link budget: {0}")]
    InvalidLink(String),

    #[error("slot {k} is not a beam-alignment slot for horizon L = {horizon}")]
    NotAlignmentSlot { k: usize, horizon: usize },

    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),

    #[error("exact oracle limited to {max_arms} arms and depth {max_depth}, got {arms} arms and depth {depth}")]
    OracleGuard {
        arms: usize,
        depth: usize,
        max_arms: usize,
        max_depth: usize,
    },

    #[error("quadrature did not converge: node doubling changed the result by {change:e}")]
    QuadratureNotConverged { change: f64 },

    #[error("invalid rate/power parameters: {0}")]
    InvalidRate(String),

    #[error("invalid policy spec {0:?}")]
    InvalidPolicy(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("no results to emit")]
    EmptyResults,

    #[error("{path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Serialize(String),
}
