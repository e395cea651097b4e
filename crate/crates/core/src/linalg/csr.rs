use crate::error::{Error, Result};

/// Compressed sparse row matrix over `f64`.
///
/// Column indices are strictly increasing within each row, so the storage is
/// canonical: two matrices with the same entries compare equal field by field.
/// Explicit zeros are allowed and kept (they are part of the sparsity pattern).
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, validating every structural invariant.
    pub fn try_from_parts(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidStructure("row_offsets[0] must be 0".into()));
        }
        let nnz = row_offsets[nrows];
        if col_indices.len() != nnz || values.len() != nnz {
            return Err(Error::InvalidStructure(format!(
                "nnz = {} but {} column indices and {} values",
                nnz,
                col_indices.len(),
                values.len()
            )));
        }
        for row in 0..nrows {
            let (start, end) = (row_offsets[row], row_offsets[row + 1]);
            if start > end {
                return Err(Error::InvalidStructure(format!(
                    "row_offsets decreases at row {row}"
                )));
            }
            let cols = &col_indices[start..end];
            if let Some(&last) = cols.last() {
                if last >= ncols {
                    return Err(Error::InvalidStructure(format!(
                        "column index {last} out of range in row {row}"
                    )));
                }
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidStructure(format!(
                    "column indices not strictly increasing in row {row}"
                )));
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("matrix value at position {pos}")));
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Assembles a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= nrows || c >= ncols {
                return Err(Error::InvalidStructure(format!(
                    "triplet ({r}, {c}) outside a {nrows}x{ncols} matrix"
                )));
            }
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self::try_from_parts(nrows, ncols, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Converts a dense row-major matrix, keeping only nonzero entries.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch("ragged dense matrix".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &triplets)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of one row.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    /// Iterates over `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            dense[i][j] = v;
        }
        dense
    }

    /// Sparse matrix-vector product `A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x`, summing each row in ascending column order.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols || y.len() != self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to vector of length {} (output length {})",
                self.nrows,
                self.ncols,
                x.len(),
                y.len()
            )));
        }
        for (i, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *out = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
        Ok(())
    }

    /// Diagonal entries; absent entries read as zero.
    pub fn diagonal(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "diagonal of a non-square {}x{} matrix",
                self.nrows, self.ncols
            )));
        }
        Ok((0..self.nrows).map(|i| self.get(i, i)).collect())
    }

    /// Entrywise sum `self + other`.
    pub fn add(&self, other: &CsrMatrix) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch(format!(
                "adding {}x{} and {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let triplets: Vec<_> = self.triplets().chain(other.triplets()).collect();
        Self::from_triplets(self.nrows, self.ncols, &triplets)
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &triplets).expect("transpose of valid CSR")
    }

    /// Multiplies row `i` by `scale[i]`.
    pub fn scale_rows(&self, scale: &[f64]) -> Result<Self> {
        if scale.len() != self.nrows {
            return Err(Error::DimensionMismatch("row scale length".into()));
        }
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                out.values[k] *= scale[i];
            }
        }
        Self::try_from_parts(
            out.nrows,
            out.ncols,
            out.row_offsets,
            out.col_indices,
            out.values,
        )
    }

    /// Largest `|A[i][j] - A[j][i]|` over all stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }
}

/// Constant-band tridiagonal matrix description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TridiagSpec {
    pub n: usize,
    pub sub: f64,
    pub diag: f64,
    pub sup: f64,
}

impl TridiagSpec {
    pub fn new(n: usize, sub: f64, diag: f64, sup: f64) -> Self {
        Self { n, sub, diag, sup }
    }
}

/// Builds the `n x n` tridiagonal matrix with constant bands.
///
/// All three bands are stored even when a band value is zero, so the pattern
/// always has `3n - 2` entries for `n >= 2`.
pub fn build_tridiag(spec: TridiagSpec) -> Result<CsrMatrix> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::InvalidArgument(
            "tridiagonal dimension must be >= 1".into(),
        ));
    }
    if ![spec.sub, spec.diag, spec.sup]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(Error::NonFinite("tridiagonal band value".into()));
    }
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(3 * n);
    let mut values = Vec::with_capacity(3 * n);
    row_offsets.push(0);
    for i in 0..n {
        if i > 0 {
            col_indices.push(i - 1);
            values.push(spec.sub);
        }
        col_indices.push(i);
        values.push(spec.diag);
        if i + 1 < n {
            col_indices.push(i + 1);
            values.push(spec.sup);
        }
        row_offsets.push(col_indices.len());
    }
    CsrMatrix::try_from_parts(n, n, row_offsets, col_indices, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiag_single_row() {
        let m = build_tridiag(TridiagSpec::new(1, -1.0, 2.0, -1.0)).unwrap();
        assert_eq!(m.to_dense(), vec![vec![2.0]]);
        assert_eq!(m.nnz(), 1);
    }

    #[test]
    fn tridiag_laplacian_rows() {
        let m = build_tridiag(TridiagSpec::new(3, -1.0, 2.0, -1.0)).unwrap();
        assert_eq!(
            m.to_dense(),
            vec![
                vec![2.0, -1.0, 0.0],
                vec![-1.0, 2.0, -1.0],
                vec![0.0, -1.0, 2.0]
            ]
        );
        assert_eq!(m.nnz(), 7);
    }

    #[test]
    fn tridiag_convection_bands() {
        let r = 1.0 / 8.0;
        let m = build_tridiag(TridiagSpec::new(3, -1.0 - r, 6.0, -1.0 + r)).unwrap();
        assert_eq!(
            m.to_dense(),
            vec![
                vec![6.0, -0.875, 0.0],
                vec![-1.125, 6.0, -0.875],
                vec![0.0, -1.125, 6.0]
            ]
        );
    }

    #[test]
    fn tridiag_rejects_empty() {
        assert!(build_tridiag(TridiagSpec::new(0, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn matvec_examples() {
        let i3 = CsrMatrix::identity(3);
        assert_eq!(i3.matvec(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);

        let zero = CsrMatrix::from_triplets(3, 3, &[]).unwrap();
        assert_eq!(zero.matvec(&[4.0, -1.0, 7.5]).unwrap(), vec![0.0; 3]);

        let t = build_tridiag(TridiagSpec::new(3, -1.0, 2.0, -1.0)).unwrap();
        assert_eq!(t.matvec(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        let i3 = CsrMatrix::identity(3);
        assert!(matches!(
            i3.matvec(&[1.0, 2.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn diagonal_examples() {
        let t = build_tridiag(TridiagSpec::new(3, -1.0, 2.0, -1.0)).unwrap();
        assert_eq!(t.diagonal().unwrap(), vec![2.0, 2.0, 2.0]);
        let swap = CsrMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(swap.diagonal().unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn triplets_merge_duplicates() {
        let m = CsrMatrix::from_triplets(2, 2, &[(1, 0, 1.0), (0, 1, 2.0), (1, 0, 0.5)]).unwrap();
        assert_eq!(m.to_dense(), vec![vec![0.0, 2.0], vec![1.5, 0.0]]);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn parts_validation() {
        assert!(CsrMatrix::try_from_parts(2, 2, vec![0, 1, 2], vec![0, 0], vec![1.0, 1.0]).is_ok());
        // unsorted columns
        assert!(CsrMatrix::try_from_parts(1, 2, vec![0, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        // column out of range
        assert!(CsrMatrix::try_from_parts(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
        // non-finite
        assert!(CsrMatrix::try_from_parts(1, 1, vec![0, 1], vec![0], vec![f64::NAN]).is_err());
        // nnz mismatch
        assert!(CsrMatrix::try_from_parts(1, 1, vec![0, 2], vec![0], vec![1.0]).is_err());
    }
}
