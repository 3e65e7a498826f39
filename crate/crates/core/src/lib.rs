//! Certified-precision building blocks for codings of irrational rotations.
//!
//! The crate constructs the coding word of a rotation by an irrational
//! number, its continued-fraction data, eventually periodic approximants
//! with their mismatch structure, and evaluates the associated power
//! series with certified error bounds. Every inexact quantity is carried
//! as a ball (midpoint plus radius) and every decision is made only when
//! the relevant balls are disjoint, escalating precision as needed.

pub mod approximant;
pub mod cfrac;
pub mod coding;
pub mod error;
pub mod numerics;
pub mod series;
pub mod structure;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
