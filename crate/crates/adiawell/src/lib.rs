//! Exact and asymptotic wave functions for a quantum particle in a slowly
//! shrinking potential well.

pub mod asymptotics;
pub mod branchfns;
pub mod cli;
pub mod error;
pub mod oracle;
pub mod quad;
pub mod specialfns;
pub mod spectrum;
pub mod symbolfield;
pub mod wavefield;

pub use error::{Error, Result};
