use thiserror::Error;

/// Errors shared across the construction, sieving, counting and series modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("window start u={u} is below the minimum {min}")]
    WindowTooSmall { u: u64, min: u64 },

    #[error("window [u,2u] with u={u} exceeds the cap of {cap} entries")]
    WindowTooLarge { u: u64, cap: u64 },

    #[error("modulus overflow: product of basis primes must stay below 2^62")]
    ModulusOverflow,

    #[error("dyadic gluing constants violate the required chain: {0}")]
    InvalidSchedule(String),

    #[error("arc precondition failed: need 2*P^2 < Q, got P={p:.3}, Q={q:.3}")]
    ArcPrecondition { p: f64, q: f64 },

    #[error("value {value} lies outside the admissible range [{lo},{hi}]")]
    OutOfRange { value: u64, lo: u64, hi: u64 },

    #[error("quadrature needs at least {need} nodes, got {got}")]
    TooFewNodes { need: usize, got: usize },

    #[error("basis too large: {0}")]
    BasisTooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
