use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field order {p}^{m} exceeds 2^20")]
    OrderTooLarge { p: u64, m: u32 },
    #[error("modulus must be monic of degree {expected}, got {got:?}")]
    BadModulus { expected: u32, got: Vec<u32> },
    #[error("modulus {0} is reducible")]
    ReducibleModulus(String),
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("zero raised to non-positive power {0}")]
    ZeroPower(i64),
    #[error("{what}: {divisor} does not divide {value}")]
    NotADivisor {
        what: &'static str,
        divisor: u64,
        value: u64,
    },
    #[error("element index {0} out of range for field of order {1}")]
    BadElement(u64, u32),
    #[error("value {0} lies outside the subfield")]
    OutsideSubfield(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
