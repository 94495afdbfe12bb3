//! Crate-wide error type. Domain errors are precondition violations the
//! caller can fix; numerical errors mean a hard internal check (oracle
//! equality, rounding residue, refinement convergence) failed.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Command-line or config-file input that fails validation.
    #[error("usage error: {0}")]
    Usage(String),

    /// A hard numerical invariant failed; results would be untrustworthy.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Two major arcs intersect; the dissection is only defined for
    /// parameters where every arc is disjoint from its neighbours.
    #[error(
        "major arcs overlap: centers {a1}/{q1} and {a2}/{q2} are closer than \
         the full arc width 2/tau = {width:.6e}"
    )]
    ArcOverlap {
        a1: u64,
        q1: u64,
        a2: u64,
        q2: u64,
        width: f64,
    },

    /// A sieve cache file failed magic, version, length, or spot-check
    /// validation.
    #[error("sieve cache rejected: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn cache(msg: impl Into<String>) -> Self {
        Error::Cache(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
