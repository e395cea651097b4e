use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest dimension accepted by [`dense_eig_symmetric`].
pub const DENSE_EIG_LIMIT: usize = 4096;

/// Relative symmetry tolerance for dense eigen-decomposition input.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues of a small dense symmetric matrix, sorted ascending.
pub fn dense_eig_symmetric(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(dense_eigen_decomposition(a)?.0)
}

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors as columns.
pub fn dense_eigen_decomposition(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigen-decomposition of a non-square {}x{} matrix",
            n,
            a.ncols()
        )));
    }
    if n > DENSE_EIG_LIMIT {
        return Err(Error::TooLarge {
            dim: n,
            limit: DENSE_EIG_LIMIT,
        });
    }
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let mut max_asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            max_asym = max_asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if max_asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric {
            max_asymmetry: max_asym,
        });
    }
    // symmetrize exactly before handing to the solver
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}
