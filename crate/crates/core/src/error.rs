use thiserror::Error;

/// Errors shared by all modules of the crate.
///
/// Diagnostics are carried as `f64` so the error type stays independent of
/// the scalar the caller instantiated the library with.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("argument {t} outside domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("anchor not in the target set: distance {dist:e} exceeds tolerance {tol:e}")]
    InvalidAnchor { dist: f64, tol: f64 },

    #[error("enumeration cap exceeded: stopped after {produced} of cap {cap} (partial result discarded)")]
    EnumerationCap { produced: usize, cap: usize },

    #[error("no convergence in {what}: witness at {witness}, last gap {gap:e}")]
    NonConvergence {
        what: String,
        witness: f64,
        gap: f64,
    },

    #[error("selection family has no converged valid member ({flagged} flagged)")]
    EmptyFamily { flagged: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
