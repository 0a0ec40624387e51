//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("modulus is not monic of degree {expected}")]
    BadModulus { expected: u32 },

    #[error("modulus is reducible: divisible by {factor}")]
    ReducibleModulus { factor: String },

    #[error("field order {0} exceeds the supported range")]
    FieldTooLarge(u128),

    #[error("division by zero in GF({q})")]
    DivisionByZero { q: u32 },

    #[error("operands belong to different fields")]
    FieldMismatch,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("gcd({n}, {q}) != 1, no primitive {n}-th root of unity")]
    RootOfUnity { n: usize, q: u32 },

    #[error("element is not in the embedded subfield")]
    NotInSubfield,

    #[error("zero-dimensional code has no nonzero codeword")]
    ZeroDimensional,

    #[error("code is degenerate ({0}), excluded from this operation")]
    Degenerate(&'static str),

    #[error("not a strict subcode: {0}")]
    NotStrictSubcode(&'static str),

    #[error("enumeration budget exceeded: needs about {needed} words, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("instance too large for the exact oracle: {0}")]
    Infeasible(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("guard violated: {0}")]
    Guard(String),

    #[error("internal verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
