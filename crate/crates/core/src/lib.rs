//! Exact-arithmetic toolkit for Diophantine approximation, lattice flows and
//! extremality criteria.

pub mod criteria;
pub mod diophantine;
pub mod error;
pub mod exterior;
pub mod goodness;
pub mod lattice;
pub mod logspace;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
