//! Multi-scale dynamics on the dyadic space-time lattice, regularized solvers,
//! and deterministic and stochastic renormalization-group flow maps.

pub mod cli;
pub mod error;
pub mod lattice;
pub mod rg;
pub mod solver;
pub mod stochastic;

pub use error::{Error, Result};
