use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("pole: coordinate {coord} is zero but carries exponent {exponent}")]
    Pole { coord: usize, exponent: i64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("exponent matrix is singular (det = 0)")]
    SingularExponentMatrix,

    #[error("no Laurent-monomial branch: {0}")]
    NoMonomialBranch(String),

    #[error("degenerate sampler: acceptance rate {rate:e} after {trials} trials")]
    DegenerateSampler { rate: f64, trials: u64 },

    #[error("no basis support: every basis element vanishes at the point")]
    NoBasisSupport,

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("degenerate family: {0}")]
    DegenerateFamily(String),

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("cannot certify: every test function vanishes at the point")]
    AllTestsVanish,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
