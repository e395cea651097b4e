//! Predicting the relaxation weight of weighted Jacobi with Gaussian process
//! regression.
//!
//! The crate builds the benchmark linear systems, runs Jacobi and weighted
//! Jacobi iterations, searches for the best weight on small grids, fits a GP
//! to those weights and extrapolates them to larger grids.

pub mod bench;
pub mod bounds;
pub mod config;
pub mod error;
pub mod gpr;
pub mod kernels;
pub mod linalg;
pub mod problems;
pub mod solver;
pub mod tuning;

pub use error::{Error, Result};
