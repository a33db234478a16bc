use alloc::string::String;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} exceeds the available degree {max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("precision exhausted at {bits} bits: {what}")]
    PrecisionExhausted { bits: usize, what: String },

    #[error("degenerate Pfaffian denominator in {what}")]
    DegeneratePfaffian { what: String },

    #[error("beta = 1 requires an even matrix size (got N = {0}); odd N is not covered by the Pfaffian formula")]
    OddOrthogonalSize(usize),

    #[error("Painleve integration failed near x = {x}: {what}")]
    IntegrationFailure { x: f64, what: String },

    #[error("s = {s} is outside the tabulated range [{lo}, {hi}]")]
    OutsideGrid { s: f64, lo: f64, hi: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
