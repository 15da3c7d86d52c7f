use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the extension engine and the number-theory routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} must be nonzero")]
    ZeroArgument(&'static str),

    #[error("function value vanished at z = {point}")]
    VanishedValue { point: Complex64 },

    #[error("cannot accumulate a zero factor")]
    ZeroFactor,

    #[error("non-finite value at z = {point}")]
    NonFinite { point: Complex64 },

    #[error("z = {point} lies outside the domain radius {radius}")]
    OutsideDomain { point: Complex64, radius: f64 },

    #[error("degenerate ratio {ratio}: r^{k} - 1 vanishes")]
    DegenerateRatio { ratio: Complex64, k: u32 },

    #[error("ratio r_{k} = {ratio} violates {condition}")]
    InvalidRatio {
        k: u32,
        ratio: Complex64,
        condition: &'static str,
    },

    #[error("limit extrapolation needs at least 3 samples, got {0}")]
    TooFewSamples(usize),

    #[error("limit samples must have r > 1 strictly decreasing toward 1")]
    UnorderedSamples,

    #[error("unknown function '{0}'")]
    UnknownFunction(String),

    #[error("group {group} partial diverged (log-magnitude {log_magnitude:e})")]
    DivergentPartial { group: u32, log_magnitude: f64 },

    #[error("invalid integer set: {0}")]
    InvalidSubset(String),

    #[error("{0} is outside the prime table range")]
    OutOfSieveRange(u64),

    #[error("GPO bounds too large: p_{max_prime_index}^{max_exponent_sum} does not fit in 128 bits")]
    BoundsTooLarge {
        max_prime_index: u32,
        max_exponent_sum: u32,
    },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
