//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by group construction, searches, and witness routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The power-conjugate presentation failed a consistency probe: collected
    /// normal forms do not form a group of the expected order.
    #[error("inconsistent presentation: {0}")]
    InconsistentPresentation(String),

    /// The group (or an auxiliary table) exceeds the configured size cap.
    #[error("group too large: {what} requires {needed} but the cap is {cap}")]
    TooLarge {
        what: &'static str,
        needed: u64,
        cap: u64,
    },

    /// Parameters violate a family's constraints (range, coprimality, shape).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The operation requires a group of nilpotency class exactly 2.
    #[error("group does not have nilpotency class 2")]
    NotClass2,

    /// The operation requires an odd prime.
    #[error("operation is undefined for p = 2")]
    EvenPrime,

    /// The group does not have the presentation shape the operation expects.
    #[error("group is not in the expected family: {0}")]
    NotInFamily(String),

    /// The operation only applies to the triangle-quotient 2-group family.
    #[error("group is not a triangle-quotient 2-group")]
    NotTriangleQuotient,

    /// An element does not have the normal-form shape the operation requires.
    #[error("element has the wrong form: {0}")]
    WrongForm(String),

    /// A claimed witness fails its defining check.
    #[error("claimed witness fails verification")]
    NotAWitness,

    /// The constructive witness and the exhaustive fallback both failed; this
    /// would be a genuine counterexample and is reported loudly.
    #[error("witness construction and exhaustive fallback both failed: {0}")]
    WitnessVerificationFailed(String),

    /// A budgeted search ran out of candidates without reaching a decision.
    #[error("search budget exhausted after {candidates} candidates")]
    BudgetExhausted { candidates: u64 },

    /// Presentation text could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
