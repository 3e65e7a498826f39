//! Unified error type. Variants are structured so callers can distinguish
//! "give up" conditions (precision cap) from genuine mathematical findings
//! (a violated bound or a broken progression structure), which must never
//! be silently swallowed.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid input at construction time (square discriminant, degenerate
    /// log-ratio arguments, malformed spec strings, bad weight lengths).
    #[error("construction error: {0}")]
    Construction(String),

    /// A required decision could not be certified below the precision cap.
    #[error("precision exhausted at {bits} bits while {context}")]
    PrecisionExhausted { bits: u32, context: String },

    /// A numeric verdict fell below ball resolution on untagged inputs.
    #[error("inconclusive: {0}")]
    Inconclusive(String),

    /// An orbit point or floor argument is provably at an interval boundary.
    #[error("boundary hit at n = {n}: {detail}")]
    BoundaryHit { n: u64, detail: String },

    /// The mismatch set is not a union of arithmetic progressions of the
    /// first-hit residues: a reportable finding, never silent.
    #[error("progression structure violated at level {level}, window {window}: position {witness}")]
    StructureViolation {
        level: usize,
        window: u32,
        witness: u64,
    },

    /// A certified residual exceeded its stated bound: a reportable finding.
    #[error("error bound violated at level {level}, window {window}")]
    BoundViolated { level: usize, window: u32 },

    /// The unit-circle point is a root of unity of the given order.
    #[error("unit point is a root of unity of order {order}")]
    RootOfUnity { order: u32 },

    /// Two independently computed pipelines disagreed on an exact value, or
    /// a certified residual exceeded its tolerance: a reportable finding.
    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    /// A search completed without finding the requested object.
    #[error("not found: {0}")]
    NotFound(String),

    /// Operation outside a value's mathematical domain (division by a ball
    /// containing zero, log of a nonpositive ball, and similar).
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for this oracle kind.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Input/output failure in the CLI layer.
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn inconclusive(msg: impl Into<String>) -> Self {
        Error::Inconclusive(msg.into())
    }

    pub fn not_found(msg: impl Into<String>) -> Self {
        Error::NotFound(msg.into())
    }

    /// True for the variants that represent mathematical findings rather
    /// than resource limits or bad input.
    pub fn is_finding(&self) -> bool {
        matches!(
            self,
            Error::StructureViolation { .. } | Error::BoundViolated { .. } | Error::CrossCheck(_)
        )
    }
}
