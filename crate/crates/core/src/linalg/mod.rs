//! Sparse and small dense linear algebra used by the solvers.

mod csr;
mod eig;
mod kron;
pub mod matrix_market;

pub use csr::{build_tridiag, CsrMatrix, TridiagSpec};
pub use eig::{dense_eig_symmetric, dense_eigen_decomposition, DENSE_EIG_LIMIT, SYMMETRY_TOL};
pub use kron::{kron2, kron3_sum};
pub use matrix_market::{read_matrix_market, write_matrix_market};

/// Euclidean norm.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Maximum absolute entry.
pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}
