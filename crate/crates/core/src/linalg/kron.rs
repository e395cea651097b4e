//! Explicit Kronecker-product assembly.
//!
//! Index convention: in `A ⊗ B` the row `(i_a, i_b)` maps to `i_a * nrows(B) + i_b`,
//! so the right-most factor varies fastest.

use super::csr::CsrMatrix;
use crate::error::{Error, Result};

fn checked_dim(a: usize, b: usize) -> Result<usize> {
    a.checked_mul(b)
        .ok_or_else(|| Error::InvalidArgument(format!("Kronecker dimension {a} x {b} overflows")))
}

/// `A ⊗ B` as a canonical CSR matrix.
pub fn kron2(a: &CsrMatrix, b: &CsrMatrix) -> Result<CsrMatrix> {
    let nrows = checked_dim(a.nrows(), b.nrows())?;
    let ncols = checked_dim(a.ncols(), b.ncols())?;
    let nnz = checked_dim(a.nnz(), b.nnz())?;

    let mut row_offsets = Vec::with_capacity(nrows + 1);
    let mut col_indices = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    row_offsets.push(0);
    for ia in 0..a.nrows() {
        let (a_cols, a_vals) = a.row(ia);
        for ib in 0..b.nrows() {
            let (b_cols, b_vals) = b.row(ib);
            // ascending ja, then ascending jb, keeps the row sorted
            for (&ja, &av) in a_cols.iter().zip(a_vals) {
                for (&jb, &bv) in b_cols.iter().zip(b_vals) {
                    col_indices.push(ja * b.ncols() + jb);
                    values.push(av * bv);
                }
            }
            row_offsets.push(col_indices.len());
        }
    }
    CsrMatrix::try_from_parts(nrows, ncols, row_offsets, col_indices, values)
}

/// `Tx ⊗ I ⊗ I + I ⊗ Ty ⊗ I + I ⊗ I ⊗ Tz` with coinciding entries summed.
///
/// The three factors must be square with a common dimension `n`; the result
/// is `n³ x n³`. Row `(i, j, k)` has linear index `i n² + j n + k`, so `Tz`
/// acts along the fastest-varying index.
pub fn kron3_sum(tx: &CsrMatrix, ty: &CsrMatrix, tz: &CsrMatrix) -> Result<CsrMatrix> {
    let n = tx.nrows();
    for (name, t) in [("Tx", tx), ("Ty", ty), ("Tz", tz)] {
        if !t.is_square() || t.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {n}x{n}",
                t.nrows(),
                t.ncols()
            )));
        }
    }
    let n2 = checked_dim(n, n)?;
    let dim = checked_dim(n2, n)?;

    let mut row_offsets = Vec::with_capacity(dim + 1);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    let mut scratch: Vec<(usize, f64)> = Vec::new();
    row_offsets.push(0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                scratch.clear();
                let (c, v) = tx.row(i);
                scratch.extend(
                    c.iter()
                        .zip(v)
                        .map(|(&ip, &val)| (ip * n2 + j * n + k, val)),
                );
                let (c, v) = ty.row(j);
                scratch.extend(
                    c.iter()
                        .zip(v)
                        .map(|(&jp, &val)| (i * n2 + jp * n + k, val)),
                );
                let (c, v) = tz.row(k);
                scratch.extend(
                    c.iter()
                        .zip(v)
                        .map(|(&kp, &val)| (i * n2 + j * n + kp, val)),
                );
                scratch.sort_by_key(|&(col, _)| col);

                let mut prev: Option<usize> = None;
                for &(col, val) in &scratch {
                    if prev == Some(col) {
                        *values.last_mut().expect("merged entry") += val;
                    } else {
                        col_indices.push(col);
                        values.push(val);
                        prev = Some(col);
                    }
                }
                row_offsets.push(col_indices.len());
            }
        }
    }
    CsrMatrix::try_from_parts(dim, dim, row_offsets, col_indices, values)
}
