use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("trajectory has no segments")]
    NoSegments,

    #[error("non-positive distance: {0} m")]
    NonPositiveDistance(f64),

    #[error("non-positive wavelength: {0} m")]
    NonPositiveWavelength(f64),

    #[error("threshold out of range for MCS {mcs} at target BER {target_ber:e}")]
    ThresholdOutOfRange { mcs: u8, target_ber: f64 },

    #[error("invalid MCS index {0}")]
    InvalidMcs(u8),

    #[error("unknown algorithm `{0}` (expected one of: minstrel, tara, ideal)")]
    UnknownAlgorithm(String),

    #[error("invalid configuration: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("malformed record: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}
