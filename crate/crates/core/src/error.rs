use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic 2 requires the allow-even override")]
    EvenCharacteristic,
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {order} exceeds the configured cap {cap}")]
    OrderTooLarge { order: u64, cap: u64 },
    #[error("no monic irreducible of degree {k} over F_{p} was found")]
    NoIrreducible { p: u32, k: u32 },
    #[error("polynomial must be monic of degree at least 1")]
    NotMonic,
    #[error("division by zero")]
    DivisionByZero,
    #[error("element index {index} is outside F_{q}")]
    ElementOutOfRange { index: u64, q: u32 },
    #[error("operands come from different rings or fields")]
    FieldMismatch,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("index {index} is outside [0, {size})")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("ring size {size} exceeds the configured index cap {cap}")]
    IndexCapExceeded { size: u128, cap: u64 },
    #[error("stratum parameter out of range: {0}")]
    StratumOutOfRange(String),
    #[error("scaling factor must be nonzero")]
    ZeroScale,
    #[error("set has no element of nonzero determinant")]
    NoNonzeroClass,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("resource budget exceeded: {0}")]
    Budget(String),
    #[error("power iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("invalid density {0}")]
    InvalidDensity(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
