use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid region probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("die {die} face {face} has probability {value}, outside [0, 1]")]
    InvalidDie { die: usize, face: usize, value: f64 },

    #[error("selection weights ({mu1}, {mu2}) lie outside the feasible triangle")]
    InfeasibleWeights { mu1: f64, mu2: f64 },

    #[error("horizon {horizon} exceeds the configured cap {cap}")]
    HorizonTooLarge { horizon: usize, cap: usize },

    #[error("unknown benchmark scheme `{0}`")]
    UnknownScheme(String),

    #[error("invalid run configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter { name, value, reason }
    }
}
