use thiserror::Error;

/// Errors raised by the library layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A named parameter fell outside its closed interval (or was not finite).
    #[error("{name} out of range: {value} not in [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid card set: {0}")]
    InvalidCards(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid payoff parameters: {0}")]
    InvalidPayoffs(String),

    #[error("inconsistent game setting: {0}")]
    InconsistentSetting(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A message reached the arbitrator that matches neither side of the
    /// sender's card.
    #[error("protocol error: agent {agent} sent unrecognized message {text:?}")]
    UnrecognizedMessage { agent: u8, text: String },

    #[error("protocol error: {0}")]
    Protocol(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks `value` against the closed interval `[lo, hi]`.
pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            lo,
            hi,
        })
    }
}
