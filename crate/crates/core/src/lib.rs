//! Micro-macro asymptotic-preserving solvers for collisional kinetic equations.

pub mod cg;
pub mod collision;
pub mod error;
pub mod grid;
pub mod harness;
pub mod micromacro;
pub mod reference;
pub mod spectral;
pub mod transport;
pub mod vlasov;

pub use error::{Error, ErrorCategory, Result};
