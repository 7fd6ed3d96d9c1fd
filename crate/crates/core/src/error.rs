use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse {0:?} as a signed decimal number")]
    Parse(String),
    #[error("precision of {bits} bits is below the minimum of {min}")]
    PrecisionTooLow { bits: u32, min: u32 },
    #[error("non-finite value produced in {0}")]
    NonFinite(String),
    #[error("sequence lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("partial quotient at position {index} is not positive")]
    NonPositiveQuotient { index: usize },
    #[error("{what} = {value} lies outside {domain}")]
    OutOfDomain {
        what: &'static str,
        value: String,
        domain: &'static str,
    },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("orbit lands on the break point at iterate {0}")]
    OrbitHitsBreak(usize),
    #[error("exact return at iterate {0}: the rotation number behaves as rational")]
    RationalBehaviour(usize),
    #[error("map is not a homeomorphism: {0}")]
    NotMonotone(String),
    #[error("break parameter must be positive and different from 1, got {0}")]
    InvalidGlue(String),
    #[error("break sizes differ: {0} vs {1}")]
    BreakSizeMismatch(String, String),
    #[error("pole of the fractional-linear map inside the domain near z = {0}")]
    Pole(String),
    #[error("combinatorics mismatch: {0}")]
    Combinatorics(String),
    #[error("identity violated: {0}")]
    IdentityViolated(String),
    #[error("not Cauchy at tolerance: {0}")]
    NotCauchy(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("integer overflow: {0}")]
    Overflow(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
