//! Trace-class operators on Hilbert modules over commutative C*-algebras with
//! finite spectrum, frames of multipliers, and the Haagerup tensor product.

pub mod algebra;
pub mod builtin;
pub mod error;
pub mod frames;
pub mod haagerup;
pub mod linalg;
pub mod module;
pub mod random;
pub mod spectrum;
pub mod traceclass;
pub mod workspace;

pub use error::{Error, Result};
