//! Jacobi and weighted Jacobi iterations.
//!
//! The update is `x_{t+1} = x_t + ω D⁻¹ (b − A x_t)` with `D = diag(A)`.
//! Progress is measured by the preconditioned relative residual
//! `RRES_k = ‖D⁻¹(b − A x_k)‖₂ / ‖D⁻¹(b − A x_0)‖₂`, evaluated after every
//! update; the residual that drives the stopping test is the same vector
//! used by the next update, so each iteration costs exactly one product
//! with `A`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::problems::{LinearSystem, ProblemId};

/// Iterates whose max-norm exceed this are treated as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e150;

/// Initial residual norms below this count as zero.
pub const ZERO_RESIDUAL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Relaxation weight; `1.0` is plain Jacobi.
    pub omega: f64,
    /// Stop once `RRES < tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub record_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            omega: 1.0,
            tol: 1e-6,
            max_iter: 500_000,
            record_history: false,
        }
    }
}

impl SolverConfig {
    pub fn jacobi() -> Self {
        Self::default()
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_history(mut self, record: bool) -> Self {
        self.record_history = record;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "omega must be positive and finite, got {}",
                self.omega
            )));
        }
        Ok(())
    }
}

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// The iterate overflowed [`DIVERGENCE_LIMIT`] or became non-finite.
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub iterations: usize,
    pub converged: bool,
    pub final_rres: f64,
    /// One entry per iteration when requested.
    pub rres_history: Option<Vec<f64>>,
    pub wall_seconds: f64,
    pub omega_used: f64,
    pub termination: Termination,
    /// `‖D⁻¹(b − A x_0)‖₂`.
    pub initial_residual_norm: f64,
}

/// Maximum that, unlike `f64::max`, keeps a NaN once seen.
#[inline]
pub(crate) fn nan_max(acc: f64, v: f64) -> f64 {
    if acc.is_nan() || v.is_nan() {
        f64::NAN
    } else {
        acc.max(v)
    }
}

/// Writes `r = D⁻¹(b − A x)` and returns `‖r‖₂²`.
fn preconditioned_residual(sys: &LinearSystem, x: &[f64], r: &mut [f64]) -> f64 {
    let a = sys.matrix();
    let offsets = a.row_offsets();
    let cols = a.col_indices();
    let vals = a.values();
    let b = sys.rhs();
    let d = sys.diagonal();
    let mut sq = 0.0;
    for i in 0..r.len() {
        let (start, end) = (offsets[i], offsets[i + 1]);
        let mut ax = 0.0;
        for (j, v) in cols[start..end].iter().zip(&vals[start..end]) {
            ax += v * x[*j];
        }
        let ri = (b[i] - ax) / d[i];
        r[i] = ri;
        sq += ri * ri;
    }
    sq
}

fn check_dims(sys: &LinearSystem, x: &[f64]) -> Result<()> {
    if x.len() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a system of dimension {}",
            x.len(),
            sys.dim()
        )));
    }
    Ok(())
}

/// `‖D⁻¹(b − A x)‖₂`.
pub fn preconditioned_residual_norm(sys: &LinearSystem, x: &[f64]) -> Result<f64> {
    check_dims(sys, x)?;
    let mut r = vec![0.0; sys.dim()];
    Ok(preconditioned_residual(sys, x, &mut r).sqrt())
}

/// `‖D⁻¹(b − A x)‖₂ / r0_norm`.
pub fn relative_residual(sys: &LinearSystem, x: &[f64], r0_norm: f64) -> Result<f64> {
    if !(r0_norm > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "reference residual norm must be positive, got {r0_norm}"
        )));
    }
    Ok(preconditioned_residual_norm(sys, x)? / r0_norm)
}

/// Runs the weighted Jacobi iteration from `x0`, returning the report and the
/// final iterate.
pub fn weighted_jacobi_solve(
    sys: &LinearSystem,
    cfg: &SolverConfig,
    x0: &[f64],
) -> Result<(IterationReport, Vec<f64>)> {
    weighted_jacobi_solve_bounded(sys, cfg, x0, f64::INFINITY)
}

/// Like [`weighted_jacobi_solve`], but also stops with
/// [`Termination::Diverged`] once RRES exceeds `rres_ceiling`.
///
/// The grid traversal passes a ceiling above which convergence is provably
/// impossible, which ends hopeless runs early.
pub fn weighted_jacobi_solve_bounded(
    sys: &LinearSystem,
    cfg: &SolverConfig,
    x0: &[f64],
    rres_ceiling: f64,
) -> Result<(IterationReport, Vec<f64>)> {
    cfg.validate()?;
    check_dims(sys, x0)?;
    let start = Instant::now();
    let omega = cfg.omega;

    let mut x = x0.to_vec();
    let mut r = vec![0.0; sys.dim()];
    let r0 = preconditioned_residual(sys, &x, &mut r).sqrt();
    if !r0.is_finite() {
        return Err(Error::NonFinite("initial residual".into()));
    }
    if r0 == 0.0 {
        return Err(Error::ZeroInitialResidual);
    }

    let mut history = cfg
        .record_history
        .then(|| Vec::with_capacity(cfg.max_iter.min(1 << 16)));
    let mut iterations = 0;
    let mut rres = 1.0;
    let mut termination = Termination::MaxIterations;
    while iterations < cfg.max_iter {
        iterations += 1;
        let mut max_abs = 0.0f64;
        for (xi, ri) in x.iter_mut().zip(&r) {
            *xi += omega * ri;
            max_abs = nan_max(max_abs, xi.abs());
        }
        if !(max_abs <= DIVERGENCE_LIMIT) {
            let sq = preconditioned_residual(sys, &x, &mut r);
            rres = if sq.is_finite() {
                sq.sqrt() / r0
            } else {
                f64::INFINITY
            };
            if let Some(h) = history.as_mut() {
                h.push(rres);
            }
            termination = Termination::Diverged;
            log::debug!("weighted Jacobi (omega = {omega}) diverged after {iterations} iterations");
            break;
        }
        rres = preconditioned_residual(sys, &x, &mut r).sqrt() / r0;
        if let Some(h) = history.as_mut() {
            h.push(rres);
        }
        if rres < cfg.tol {
            termination = Termination::Converged;
            break;
        }
        if rres > rres_ceiling {
            termination = Termination::Diverged;
            break;
        }
    }

    let report = IterationReport {
        iterations,
        converged: termination == Termination::Converged,
        final_rres: rres,
        rres_history: history,
        wall_seconds: start.elapsed().as_secs_f64(),
        omega_used: omega,
        termination,
        initial_residual_norm: r0,
    };
    Ok((report, x))
}

/// The normalized all-ones vector `e / ‖e‖₂`.
pub fn normalized_ones(dim: usize) -> Vec<f64> {
    vec![1.0 / (dim as f64).sqrt(); dim]
}

/// Starting vector chosen for a system.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialGuess {
    pub x0: Vec<f64>,
    /// True when the default was replaced because its residual vanished.
    pub substituted: bool,
}

/// Returns `e / ‖e‖₂`, except for the Neumann Laplace problem where that
/// vector lies in the null space; there the first unit vector is used.
pub fn initial_guess(sys: &LinearSystem) -> Result<InitialGuess> {
    let x0 = normalized_ones(sys.dim());
    if sys.problem_id == ProblemId::Laplace2dNeumann
        && preconditioned_residual_norm(sys, &x0)? < ZERO_RESIDUAL_TOL
    {
        let mut e = vec![0.0; sys.dim()];
        e[0] = 1.0;
        log::info!(
            "{} n={}: normalized ones vector has zero residual, starting from the first unit vector",
            sys.problem_id,
            sys.n_grid
        );
        return Ok(InitialGuess {
            x0: e,
            substituted: true,
        });
    }
    Ok(InitialGuess {
        x0,
        substituted: false,
    })
}

/// Solves from [`initial_guess`].
pub fn solve_from_default_guess(
    sys: &LinearSystem,
    cfg: &SolverConfig,
) -> Result<(IterationReport, Vec<f64>)> {
    let guess = initial_guess(sys)?;
    weighted_jacobi_solve(sys, cfg, &guess.x0)
}

/// Euclidean error against the stored exact solution, if any.
pub fn solution_error(sys: &LinearSystem, x: &[f64]) -> Option<f64> {
    sys.x_exact.as_ref().map(|xe| {
        let diff: Vec<f64> = xe.iter().zip(x).map(|(a, b)| a - b).collect();
        norm2(&diff)
    })
}
