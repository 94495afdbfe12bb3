//! Numerical laboratory for the circle-method treatment of even numbers
//! as sums of two primes: exact representation counts, truncated
//! singular-series variants, and quadrature over major/minor arcs, all
//! behind a deterministic CLI.

pub mod circle;
pub mod cli;
pub mod error;
pub mod goldbach;
pub mod primes;
pub mod series;
pub mod util;

pub use error::{Error, Result};
