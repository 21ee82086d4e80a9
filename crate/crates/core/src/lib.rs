//! Simulator and verification toolkit for the quantum double model `D(G)` over
//! finite solvable groups, including adaptive constant-depth circuits for
//! ground-state preparation, ribbon operators and charge measurement.

pub mod error;
pub mod group;
pub mod lattice;
pub mod model;
pub mod protocols;
pub mod rep;
pub mod sim;

pub use error::{Error, Result};
