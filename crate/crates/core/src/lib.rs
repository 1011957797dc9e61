//! Fuzzy decomposition of finite reversible Markov chains.
//!
//! A reversible chain is a pair `(Q, π)`: a generator matrix with
//! nonnegative off-diagonal rates and zero row sums, in detailed balance
//! with a stationary probability measure `π`. A *fuzzy partition* assigns
//! each state a membership weight in every class, with weights summing to
//! one per state. From a chain and a fuzzy partition this crate builds
//!
//! - the class measure `π̂` and per-class measures `π_i`,
//! - the projection chain `Q̂` on classes and the restriction chains `Q_i`
//!   on class supports,
//! - the coupling quality `χ` of a family of couplings between the `π_i`,
//!
//! and machine-checks the decomposition identities for variance and
//! entropy, the Dirichlet-form inequality, and the lower bound
//! `c(Q) ≥ min { χ·c(Q̂), min_i c(Q_i) }` for the Poincaré, modified
//! log-Sobolev, and log-Sobolev constants.
//!
//! The Poincaré constant is computed exactly (spectrally); the MLSI and
//! LSI constants are estimated by multi-start ratio minimization and are
//! therefore certified *upper* bounds of the true constants.
//!
//! The crate is `no_std` (with `alloc`); all file formats and the command
//! line front end live in the companion `fuzzymc-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chain;
pub mod constants;
pub mod coupling;
pub mod decomposition;
pub mod glued;
pub mod linalg;
mod math;
pub mod sample;
pub mod verify;

use alloc::string::String;

/// Errors shared across the crate.
///
/// Validation *reports* (tolerance violations in otherwise well-formed
/// inputs) are not errors; `Error` covers structurally malformed inputs
/// and domain violations that make an operation meaningless.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Mismatched or impossible dimensions.
    #[error("shape error: {0}")]
    Shape(String),
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Structurally invalid input (indices out of support, duplicates, ...).
    #[error("invalid input: {0}")]
    Invalid(String),
    /// An optimization or search produced no admissible candidate.
    #[error("no valid candidate: {0}")]
    NoCandidate(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub use chain::{PsiKind, ReversibleChain, StateFunction};
pub use coupling::{Coupling, CouplingSet};
pub use decomposition::{DecomposedSystem, FuzzyPartition};
