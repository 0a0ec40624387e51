//! Workbench for quantum CSS codes with locality.
//!
//! The crate builds up from exact finite-field arithmetic ([`galois`]) and
//! linear codes with certified minimum distances ([`linear`]), through
//! locality certificates and the classical bound machinery ([`locality`]),
//! cyclic codes via cyclotomic cosets ([`cyclic`]), CSS composition with
//! quantum locality ([`css`]), explicit code families ([`families`]), and
//! asymptotic rate bounds ([`asymptotic`]). [`certificate`] bundles the
//! results into canonical JSON that re-validates without re-running any
//! search.

pub mod asymptotic;
pub mod budget;
pub mod certificate;
pub mod css;
pub mod cyclic;
pub mod error;
pub mod families;
pub mod galois;
pub mod linear;
pub mod locality;

pub use budget::Budget;
pub use error::{Error, Result};

/// Floating-point scalar for rate computations.
pub type Rate = f64;
/// Exact rational scalar for rate computations.
pub type ExactRate = num_rational::Ratio<i64>;
