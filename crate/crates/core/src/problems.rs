//! Discretized model problems.
//!
//! Three families are provided: a 2D Laplace problem with Neumann boundary
//! closure, a 3D convection-diffusion problem with unit convection, and a
//! 3D convection-dominated problem with small diffusion and upwinded
//! convection. Every builder is deterministic.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{build_tridiag, kron2, kron3_sum, CsrMatrix, TridiagSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemId {
    Laplace2dNeumann,
    ConvDiff3d,
    SmallDiffConvDiff3d,
}

impl ProblemId {
    pub const ALL: [ProblemId; 3] = [
        ProblemId::Laplace2dNeumann,
        ProblemId::ConvDiff3d,
        ProblemId::SmallDiffConvDiff3d,
    ];

    /// Short name used on the command line and in output files.
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemId::Laplace2dNeumann => "laplace2d",
            ProblemId::ConvDiff3d => "convdiff3d",
            ProblemId::SmallDiffConvDiff3d => "smalldiff3d",
        }
    }

    /// Smallest admissible grid parameter.
    pub fn min_n(self) -> usize {
        match self {
            ProblemId::Laplace2dNeumann => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "laplace2d" | "laplace2dneumann" => Ok(ProblemId::Laplace2dNeumann),
            "convdiff3d" => Ok(ProblemId::ConvDiff3d),
            "smalldiff3d" | "smalldiffconvdiff3d" => Ok(ProblemId::SmallDiffConvDiff3d),
            other => Err(Error::InvalidArgument(format!(
                "unknown problem '{other}' (expected laplace2d, convdiff3d or smalldiff3d)"
            ))),
        }
    }
}

/// Physical coefficients of the small-diffusion problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    /// Diffusion coefficient.
    pub epsilon: f64,
    /// Convection coefficient (same in every direction).
    pub beta: f64,
    /// Edge length of the cubic domain.
    pub domain_length: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            beta: 3.0,
            domain_length: 1.0,
        }
    }
}

impl ProblemParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if !self.beta.is_finite() {
            return Err(Error::InvalidArgument("beta must be finite".into()));
        }
        if !(self.domain_length > 0.0 && self.domain_length.is_finite()) {
            return Err(Error::InvalidArgument(
                "domain_length must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A square system `A x = b` together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    a: CsrMatrix,
    b: Vec<f64>,
    diag: Vec<f64>,
    pub n_grid: usize,
    pub problem_id: ProblemId,
    pub params: ProblemParams,
    pub x_exact: Option<Vec<f64>>,
}

impl LinearSystem {
    /// Validates shape, finiteness and a zero-free diagonal.
    pub fn new(
        a: CsrMatrix,
        b: Vec<f64>,
        n_grid: usize,
        problem_id: ProblemId,
        params: ProblemParams,
        x_exact: Option<Vec<f64>>,
    ) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "system matrix is {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.len() != a.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, matrix has {} rows",
                b.len(),
                a.nrows()
            )));
        }
        if let Some(x) = &x_exact {
            if x.len() != a.nrows() {
                return Err(Error::DimensionMismatch("exact solution length".into()));
            }
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("right-hand side".into()));
        }
        let diag = a.diagonal()?;
        if let Some(row) = diag.iter().position(|&d| d == 0.0) {
            return Err(Error::ZeroDiagonal { row });
        }
        Ok(Self {
            a,
            b,
            diag,
            n_grid,
            problem_id,
            params,
            x_exact,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }
}

/// Dispatches to the builder for `problem`.
pub fn build_problem(problem: ProblemId, n: usize, params: &ProblemParams) -> Result<LinearSystem> {
    match problem {
        ProblemId::Laplace2dNeumann => build_laplace2d_neumann(n),
        ProblemId::ConvDiff3d => build_convdiff3d(n),
        ProblemId::SmallDiffConvDiff3d => build_small_diff_convdiff3d(n, params),
    }
}

/// 1D second-difference operator on `m` points with the ghost-point
/// Neumann closure: interior rows `[-1, 2, -1]`, boundary rows `[2, -2]`.
fn neumann_second_difference(m: usize) -> Result<CsrMatrix> {
    let mut triplets = Vec::with_capacity(3 * m);
    for i in 0..m {
        triplets.push((i, i, 2.0));
        if i == 0 {
            triplets.push((0, 1, -2.0));
        } else if i == m - 1 {
            triplets.push((i, i - 1, -2.0));
        } else {
            triplets.push((i, i - 1, -1.0));
            triplets.push((i, i + 1, -1.0));
        }
    }
    CsrMatrix::from_triplets(m, m, &triplets)
}

/// 2D Laplace equation with homogeneous Neumann data on an `n x n` grid.
///
/// The unknowns are the `(n-2)²` interior nodes and `A = Dx ⊗ I + I ⊗ Dy`.
/// The matrix is singular (constants are in its null space) and `b = 0`.
pub fn build_laplace2d_neumann(n: usize) -> Result<LinearSystem> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "laplace2d needs n >= 4, got {n}"
        )));
    }
    let m = n - 2;
    let d = neumann_second_difference(m)?;
    let eye = CsrMatrix::identity(m);
    let a = kron2(&d, &eye)?.add(&kron2(&eye, &d)?)?;
    let b = vec![0.0; m * m];
    LinearSystem::new(
        a,
        b,
        n,
        ProblemId::Laplace2dNeumann,
        ProblemParams::default(),
        None,
    )
}

/// 3D convection-diffusion with `t1 = 6`, `t2 = -1 - r`, `t3 = -1 + r`,
/// `r = 1 / (2n + 2)`, and right-hand side `b = A·1` so that the exact
/// solution is the all-ones vector.
pub fn build_convdiff3d(n: usize) -> Result<LinearSystem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "convdiff3d needs n >= 2, got {n}"
        )));
    }
    let r = convdiff3d_r(n);
    let (t2, t3) = (-1.0 - r, -1.0 + r);
    let tx = build_tridiag(TridiagSpec::new(n, t2, 6.0, t3))?;
    let tyz = build_tridiag(TridiagSpec::new(n, t2, 0.0, t3))?;
    let a = kron3_sum(&tx, &tyz, &tyz)?;
    let x_exact = vec![1.0; a.nrows()];
    let b = a.matvec(&x_exact)?;
    LinearSystem::new(
        a,
        b,
        n,
        ProblemId::ConvDiff3d,
        ProblemParams::default(),
        Some(x_exact),
    )
}

/// Convection parameter `r = 1/(2n+2)` of [`build_convdiff3d`].
pub fn convdiff3d_r(n: usize) -> f64 {
    1.0 / (2.0 * n as f64 + 2.0)
}

/// Interior grid coordinates `i h`, `i = 1..=n`, `h = L / (n + 1)`.
pub fn interior_coordinates(n: usize, domain_length: f64) -> Vec<f64> {
    let h = domain_length / (n as f64 + 1.0);
    (1..=n).map(|i| i as f64 * h).collect()
}

/// 1D operator `eps·tridiag(-1,2,-1)/h² + beta·tridiag(-1,1,0)/h`.
fn upwind_convection_diffusion_1d(n: usize, params: &ProblemParams) -> Result<CsrMatrix> {
    let h = params.domain_length / (n as f64 + 1.0);
    let diff = params.epsilon / (h * h);
    let conv = params.beta / h;
    build_tridiag(TridiagSpec::new(n, -diff - conv, 2.0 * diff + conv, -diff))
}

/// Manufactured solution `sin(πx/L) sin(πy/L) sin(πz/L)`.
pub fn smalldiff_exact_solution(x: f64, y: f64, z: f64, domain_length: f64) -> f64 {
    let k = PI / domain_length;
    (k * x).sin() * (k * y).sin() * (k * z).sin()
}

/// Forcing obtained by applying `-eps Δ + beta (∂x + ∂y + ∂z)` to the
/// manufactured solution.
pub fn smalldiff_forcing(x: f64, y: f64, z: f64, params: &ProblemParams) -> f64 {
    let k = PI / params.domain_length;
    let (sx, sy, sz) = ((k * x).sin(), (k * y).sin(), (k * z).sin());
    let (cx, cy, cz) = ((k * x).cos(), (k * y).cos(), (k * z).cos());
    3.0 * params.epsilon * k * k * sx * sy * sz
        + params.beta * k * (cx * sy * sz + sx * cy * sz + sx * sy * cz)
}

/// 3D convection-diffusion with small diffusion: centred second differences,
/// backward (upwind) first differences, manufactured solution
/// `u = sin(πx) sin(πy) sin(πz)` and forcing sampled from the continuous
/// operator applied to `u`.
///
/// Unknowns are ordered lexicographically with `x` fastest. The three 1D
/// operators coincide, so the Kronecker sum is the same for any axis order.
pub fn build_small_diff_convdiff3d(n: usize, params: &ProblemParams) -> Result<LinearSystem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "smalldiff3d needs n >= 2, got {n}"
        )));
    }
    params.validate()?;
    let a1 = upwind_convection_diffusion_1d(n, params)?;
    let a = kron3_sum(&a1, &a1, &a1)?;

    let coords = interior_coordinates(n, params.domain_length);
    let mut b = Vec::with_capacity(n * n * n);
    let mut x_exact = Vec::with_capacity(n * n * n);
    for &z in &coords {
        for &y in &coords {
            for &x in &coords {
                b.push(smalldiff_forcing(x, y, z, params));
                x_exact.push(smalldiff_exact_solution(x, y, z, params.domain_length));
            }
        }
    }
    LinearSystem::new(
        a,
        b,
        n,
        ProblemId::SmallDiffConvDiff3d,
        *params,
        Some(x_exact),
    )
}

/// Writes the `key = value` sidecar describing a built system.
pub fn write_metadata<W: Write>(sys: &LinearSystem, mut out: W) -> Result<()> {
    writeln!(out, "problem_id = {}", sys.problem_id)?;
    writeln!(out, "n = {}", sys.n_grid)?;
    writeln!(out, "dimension = {}", sys.dim())?;
    writeln!(out, "nnz = {}", sys.matrix().nnz())?;
    writeln!(out, "epsilon = {:e}", sys.params.epsilon)?;
    writeln!(out, "beta = {:e}", sys.params.beta)?;
    writeln!(out, "domain_length = {:e}", sys.params.domain_length)?;
    writeln!(out, "has_exact_solution = {}", sys.x_exact.is_some())?;
    out.flush()?;
    Ok(())
}

/// Metadata recovered from a sidecar file.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMetadata {
    pub problem_id: ProblemId,
    pub n: usize,
    pub dimension: usize,
    pub params: ProblemParams,
}

pub fn read_metadata<R: BufRead>(input: R) -> Result<SystemMetadata> {
    let map = crate::config::parse_key_values(input)?;
    let get = |key: &str| {
        map.get(key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::parse(0, format!("missing key '{key}'")))
    };
    let num = |key: &str| -> Result<f64> {
        let (line, v) = &map[key];
        v.parse()
            .map_err(|e| Error::parse(*line, format!("{key}: {e}")))
    };
    let int = |key: &str| -> Result<usize> {
        let (line, v) = &map[key];
        v.parse()
            .map_err(|e| Error::parse(*line, format!("{key}: {e}")))
    };
    let problem_id: ProblemId = get("problem_id")?.parse()?;
    for key in ["n", "dimension", "epsilon", "beta", "domain_length"] {
        get(key)?;
    }
    Ok(SystemMetadata {
        problem_id,
        n: int("n")?,
        dimension: int("dimension")?,
        params: ProblemParams {
            epsilon: num("epsilon")?,
            beta: num("beta")?,
            domain_length: num("domain_length")?,
        },
    })
}

/// Re-reads a system from the matrix, right-hand-side and sidecar files
/// written by the CLI `export` path.
pub fn load_system(
    matrix: CsrMatrix,
    rhs: Vec<f64>,
    meta: &SystemMetadata,
) -> Result<LinearSystem> {
    if meta.dimension != rhs.len() {
        return Err(Error::DimensionMismatch(format!(
            "sidecar declares dimension {}, right-hand side has {}",
            meta.dimension,
            rhs.len()
        )));
    }
    LinearSystem::new(matrix, rhs, meta.n, meta.problem_id, meta.params, None)
}

/// Writes one value per line with round-trip precision.
pub fn write_vector<W: Write>(values: &[f64], mut out: W) -> Result<()> {
    for v in values {
        writeln!(out, "{v:e}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_vector<R: BufRead>(input: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(
            t.parse()
                .map_err(|e| Error::parse(idx + 1, format!("bad value '{t}': {e}")))?,
        );
    }
    Ok(out)
}

/// Linear index of interior node `(ix, iy, iz)` in the x-fastest ordering.
pub fn grid_index_3d(n: usize, ix: usize, iy: usize, iz: usize) -> usize {
    ix + n * (iy + n * iz)
}
