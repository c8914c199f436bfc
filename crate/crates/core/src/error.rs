use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {index} out of range for dimension {dim}")]
    CoordinateOutOfRange { index: usize, dim: usize },

    #[error("t = {t} lies outside the tabulated range [{min}, {max}]")]
    OutOfRange { t: f64, min: f64, max: f64 },

    #[error("noise kind `{0}` has no sampler")]
    UnsupportedSampler(String),

    #[error("characteristic function vanishes on the integration band at u = {u} (|value| = {modulus:e})")]
    DivisionSingularity { u: f64, modulus: f64 },

    #[error("derivative evaluation overflowed; largest safe 1/h is {max_inverse_bandwidth}")]
    Overflow { max_inverse_bandwidth: f64 },

    #[error("positive part of the estimate has zero mass")]
    DegenerateEstimate,

    #[error("grid does not cover the estimate: {0}")]
    GridCoverage(String),

    #[error("function is not a CDF on the given range: {0}")]
    NotACdf(String),

    #[error("transport problem too large: {entries} cost entries exceeds cap {cap}; quantize the inputs first")]
    ProblemTooLarge { entries: usize, cap: usize },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("perturbation amplitude {amplitude:e} violates the envelope; maximal feasible amplitude is {max_feasible:e}")]
    EnvelopeViolation { amplitude: f64, max_feasible: f64 },

    #[error("construction of H failed: property {property} violated ({detail})")]
    Certification {
        property: &'static str,
        detail: String,
    },

    #[error("chi-square quotient undefined at cell {index} (x = {x}): h0 = 0 but h1 = {h1:e}")]
    ZeroDenominator { index: usize, x: f64, h1: f64 },

    #[error("grid spacing mismatch: {0} vs {1}")]
    SpacingMismatch(f64, f64),

    #[error("finite-difference noise floor exceeded: {0}")]
    Resolution(String),

    #[error("study failed: {0}")]
    Study(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
