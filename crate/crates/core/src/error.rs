use thiserror::Error;

/// Errors raised by state construction, channels and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Hilbert space: {0}")]
    InvalidConfig(String),

    #[error("mode {mode} out of range for a {mode_count}-mode space")]
    ModeOutOfRange { mode: usize, mode_count: usize },

    #[error("modes must be distinct, got mode {0} twice")]
    SameMode(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not unitary (max |U†U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("state trace {trace:e} is too small to normalize")]
    VanishingTrace { trace: f64 },

    #[error("heralding probability {probability:e} is below the detection threshold")]
    HeraldingImpossible { probability: f64 },

    #[error("parameter `{name}` = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("first moment <{quadrature}> = {value:e} does not vanish")]
    NonZeroFirstMoment { quadrature: &'static str, value: f64 },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("rejection sampler acceptance rate {rate:e} is below 1e-3")]
    LowAcceptance { rate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks that `value` lies in the closed interval `[lo, hi]`.
pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
