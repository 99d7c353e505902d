//! Monotonicity-based imaging of nonlinear material anomalies from boundary
//! energy measurements.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod inversion;
pub mod fem;
pub mod materials;
pub mod potentials;

pub use error::{Error, Result};
