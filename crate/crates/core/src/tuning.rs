//! Oracles for the relaxation weight.
//!
//! Two independent routes lead to a good ω: brute-force traversal of a grid of
//! weights (the quasi-optimal ω used as GPR training target) and the spectral
//! formula `ω_opt = 2 / (λ_max + λ_min)` for the eigenvalues of `D⁻¹A`.
//!
//! `D⁻¹A` is generally not symmetric (the convection terms make `A`
//! nonsymmetric), but for all three model problems it is similar to a
//! symmetric matrix through a diagonal scaling `P`. Eigenvalues are computed
//! from that symmetric representative.

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{dense_eig_symmetric, CsrMatrix, DENSE_EIG_LIMIT};
use crate::problems::{build_problem, LinearSystem, ProblemId, ProblemParams};
use crate::solver::{
    initial_guess, nan_max, weighted_jacobi_solve_bounded, SolverConfig, DIVERGENCE_LIMIT,
};

/// Iteration cap for the per-ω runs of the training traversal.
pub const TRAINING_MAX_ITER: usize = 50_000;

/// Solver settings used while generating training data.
pub fn training_solver_config() -> SolverConfig {
    SolverConfig::default().with_max_iter(TRAINING_MAX_ITER)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMethod {
    GridTraversal,
    Spectral,
}

impl SampleMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleMethod::GridTraversal => "grid",
            SampleMethod::Spectral => "spectral",
        }
    }
}

impl fmt::Display for SampleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SampleMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "grid" => Ok(SampleMethod::GridTraversal),
            "spectral" => Ok(SampleMethod::Spectral),
            other => Err(Error::InvalidArgument(format!(
                "unknown sample method '{other}' (expected grid or spectral)"
            ))),
        }
    }
}

/// One training pair: grid size and its best relaxation weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingSample {
    pub n: usize,
    pub omega_star: f64,
    pub iterations_at_star: usize,
    pub method: SampleMethod,
}

/// Extreme eigenvalues of `D⁻¹A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEstimate {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// True when computed by a dense eigensolver.
    pub exact: bool,
}

impl SpectrumEstimate {
    pub fn new(lambda_min: f64, lambda_max: f64, exact: bool) -> Result<Self> {
        if !(lambda_min.is_finite() && lambda_max.is_finite()) {
            return Err(Error::NonFinite("spectrum bounds".into()));
        }
        if lambda_min > lambda_max {
            return Err(Error::InvalidArgument(format!(
                "lambda_min {lambda_min} exceeds lambda_max {lambda_max}"
            )));
        }
        Ok(Self {
            lambda_min,
            lambda_max,
            exact,
        })
    }

    pub fn same_sign(&self) -> bool {
        self.lambda_min * self.lambda_max > 0.0
    }

    fn require_same_sign(&self) -> Result<()> {
        if self.same_sign() {
            Ok(())
        } else {
            Err(Error::MixedSignSpectrum {
                lambda_min: self.lambda_min,
                lambda_max: self.lambda_max,
            })
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.lambda_min.abs().max(self.lambda_max.abs())
    }
}

/// `2 / (λ_max + λ_min)`. Fails unless both eigenvalues share a strict sign.
pub fn omega_opt_spectral(spec: &SpectrumEstimate) -> Result<f64> {
    spec.require_same_sign()?;
    Ok(2.0 / (spec.lambda_max + spec.lambda_min))
}

/// `ρ(I − ωD⁻¹A) = max(|1 − ωλ_min|, |1 − ωλ_max|)` for a real spectrum.
pub fn spectral_radius_wji(spec: &SpectrumEstimate, omega: f64) -> f64 {
    (1.0 - omega * spec.lambda_min)
        .abs()
        .max((1.0 - omega * spec.lambda_max).abs())
}

/// Evenly spaced weights `lo, lo + step, …, hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaGrid {
    lo: f64,
    step: f64,
    len: usize,
}

impl Default for OmegaGrid {
    fn default() -> Self {
        Self::new(0.5, 2.0, 0.001).expect("default grid is valid")
    }
}

impl OmegaGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || !(lo < hi) || !(step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "invalid omega grid lo={lo} hi={hi} step={step}"
            )));
        }
        let intervals = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok(Self {
            lo,
            step,
            len: intervals + 1,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// The `k`-th weight, rounded to 12 decimals so that values such as 1.0
    /// are hit exactly.
    pub fn value(&self, k: usize) -> f64 {
        let w = self.lo + k as f64 * self.step;
        (w * 1e12).round() / 1e12
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.value(k)).collect()
    }

    pub fn nearest_index(&self, omega: f64) -> usize {
        let k = ((omega - self.lo) / self.step).round();
        k.clamp(0.0, (self.len - 1) as f64) as usize
    }
}

/// Symmetric representative `B = P⁻¹ D⁻¹A P` with `P` diagonal.
#[derive(Debug, Clone)]
pub struct JacobiSymmetrization {
    pub matrix: CsrMatrix,
    /// `ln p_i` for the diagonal scaling.
    pub log_scale: Vec<f64>,
}

impl JacobiSymmetrization {
    /// Condition number `max p / min p` of the scaling (may be infinite).
    pub fn scaling_condition(&self) -> f64 {
        let (lo, hi) = self
            .log_scale
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            });
        (hi - lo).exp()
    }
}

/// Builds the symmetric matrix similar to `D⁻¹A`.
///
/// Requires a structurally symmetric pattern with `m_ij·m_ji > 0` on every
/// off-diagonal pair, and consistent scaling around every cycle.
pub fn symmetrize_jacobi_operator(sys: &LinearSystem) -> Result<JacobiSymmetrization> {
    let a = sys.matrix();
    let d = sys.diagonal();
    let n = a.nrows();
    let m = a.scale_rows(&d.iter().map(|v| 1.0 / v).collect::<Vec<_>>())?;
    let mt = m.transpose();

    // Pattern check and per-edge log ratio, skipping explicit zeros.
    for i in 0..n {
        let (ci, vi) = m.row(i);
        let (ct, vt) = mt.row(i);
        let nz = |c: &[usize], v: &[f64]| -> Vec<(usize, f64)> {
            c.iter()
                .zip(v)
                .filter(|(_, x)| **x != 0.0)
                .map(|(j, x)| (*j, *x))
                .collect()
        };
        let row = nz(ci, vi);
        let col = nz(ct, vt);
        if row.len() != col.len() || row.iter().zip(&col).any(|(p, q)| p.0 != q.0) {
            return Err(Error::NotSymmetrizable(format!(
                "pattern of row {i} is not symmetric"
            )));
        }
        if let Some((j, _)) = row
            .iter()
            .zip(&col)
            .find(|(p, q)| p.0 != i && p.1 * q.1 <= 0.0)
        {
            return Err(Error::NotSymmetrizable(format!(
                "entries ({i},{}) and ({},{i}) have opposite signs",
                j.0, j.0
            )));
        }
    }

    // Breadth-first propagation of ln p_j = ln p_i + ½ ln(m_ji / m_ij).
    let mut log_p = vec![f64::NAN; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if !log_p[root].is_nan() {
            continue;
        }
        log_p[root] = 0.0;
        queue.push_back(root);
        while let Some(i) = queue.pop_front() {
            let (cols, vals) = m.row(i);
            for (j, mij) in cols.iter().zip(vals) {
                if *j == i || *mij == 0.0 || !log_p[*j].is_nan() {
                    continue;
                }
                let mji = m.get(*j, i);
                log_p[*j] = log_p[i] + 0.5 * (mji / mij).ln();
                queue.push_back(*j);
            }
        }
    }

    let mut triplets = Vec::with_capacity(m.nnz());
    for (i, j, mij) in m.triplets() {
        if mij == 0.0 {
            continue;
        }
        if i == j {
            triplets.push((i, j, mij));
            continue;
        }
        let mji = m.get(j, i);
        let bij = mij.signum() * (mij * mji).sqrt();
        let scaled = mij * (log_p[j] - log_p[i]).exp();
        if !((scaled - bij).abs() <= 1e-9 * bij.abs()) {
            return Err(Error::NotSymmetrizable(format!(
                "diagonal scaling is inconsistent at ({i},{j})"
            )));
        }
        triplets.push((i, j, bij));
    }
    Ok(JacobiSymmetrization {
        matrix: CsrMatrix::from_triplets(n, n, &triplets)?,
        log_scale: log_p,
    })
}

fn to_dense(m: &CsrMatrix) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, v) in m.triplets() {
        out[(i, j)] = v;
    }
    out
}

/// All eigenvalues of `D⁻¹A`, ascending, by dense factorization.
pub fn jacobi_eigenvalues(sys: &LinearSystem) -> Result<Vec<f64>> {
    if sys.dim() > DENSE_EIG_LIMIT {
        return Err(Error::TooLarge {
            dim: sys.dim(),
            limit: DENSE_EIG_LIMIT,
        });
    }
    let sym = symmetrize_jacobi_operator(sys)?;
    dense_eig_symmetric(&to_dense(&sym.matrix))
}

/// Extreme eigenvalues of `D⁻¹A`: dense up to [`DENSE_EIG_LIMIT`], power
/// iteration beyond.
pub fn spectrum_of_jacobi_operator(sys: &LinearSystem) -> Result<SpectrumEstimate> {
    if sys.dim() <= DENSE_EIG_LIMIT {
        let eig = jacobi_eigenvalues(sys)?;
        return SpectrumEstimate::new(eig[0], eig[eig.len() - 1], true);
    }
    let sym = symmetrize_jacobi_operator(sys)?;
    power_spectrum(&sym.matrix, 1e-6, 200_000)
}

/// Largest eigenvalue of `shift·I + sign·B` for symmetric `B`, by power
/// iteration with a residual-based stopping test.
fn power_largest(b: &CsrMatrix, shift: f64, sign: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let n = b.nrows();
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract())
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut y = vec![0.0; n];
    let mut theta = 0.0;
    for it in 0..max_iter {
        b.matvec_into(&v, &mut y)?;
        for (yi, vi) in y.iter_mut().zip(&v) {
            *yi = shift * vi + sign * *yi;
        }
        theta = v.iter().zip(&y).map(|(a, c)| a * c).sum::<f64>();
        let res = y
            .iter()
            .zip(&v)
            .map(|(a, c)| (a - theta * c).powi(2))
            .sum::<f64>()
            .sqrt();
        if res <= tol * theta.abs() {
            log::debug!("power iteration converged after {} steps", it + 1);
            return Ok(theta);
        }
        let ny = y.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(ny > 0.0 && ny.is_finite()) {
            return Err(Error::NonFinite("power iteration vector".into()));
        }
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = yi / ny;
        }
    }
    log::warn!(
        "power iteration hit its cap of {max_iter} steps; estimate {theta} may be inaccurate"
    );
    Ok(theta)
}

/// Two-phase power method on a symmetric matrix: `λ_max` from `B + cI`
/// (with `c` a Gershgorin shift making it positive semidefinite), then
/// `λ_min = λ_max − μ` where `μ` is the largest eigenvalue of `λ_max·I − B`.
pub fn power_spectrum(b: &CsrMatrix, tol: f64, max_iter: usize) -> Result<SpectrumEstimate> {
    let gersh_lo = (0..b.nrows())
        .map(|i| {
            let (cols, vals) = b.row(i);
            let mut diag = 0.0;
            let mut off = 0.0;
            for (j, v) in cols.iter().zip(vals) {
                if *j == i {
                    diag = *v;
                } else {
                    off += v.abs();
                }
            }
            diag - off
        })
        .fold(f64::INFINITY, f64::min);
    let shift = (-gersh_lo).max(0.0);
    let lambda_max = power_largest(b, shift, 1.0, tol, max_iter)? - shift;
    let mu = power_largest(b, lambda_max, -1.0, tol, max_iter)?;
    SpectrumEstimate::new((lambda_max - mu).min(lambda_max), lambda_max, false)
}

/// Iteration count at one grid point of a traversal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub omega: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// RRES above this value proves the run can never converge.
///
/// With `D⁻¹A = P B P⁻¹` the residual obeys `r_k = P (I − ωB)^k P⁻¹ r_0`.
/// Components along eigenvalues with `|1 − ωλ| ≥ 1` never shrink in the
/// `P⁻¹`-weighted norm, and the others never grow, which gives
/// `RRES_k ≤ κ(P)(1 + tol)` at every step of any run that later reaches
/// `tol`. Falls back to no ceiling when the operator is not symmetrizable.
fn divergence_ceiling(sys: &LinearSystem, tol: f64) -> f64 {
    match symmetrize_jacobi_operator(sys) {
        Ok(sym) => sym.scaling_condition() * (1.0 + tol) * (1.0 + 1e-8),
        Err(_) => f64::INFINITY,
    }
}

/// Number of weights advanced together by the traversal kernel.
const LANES: usize = 8;

/// Advances up to [`LANES`] weighted Jacobi runs in lockstep so that each
/// pass over the matrix serves all of them.
///
/// `omegas` must be ascending. Every lane performs exactly the arithmetic of
/// [`weighted_jacobi_solve_bounded`], so counts agree with scalar runs.
/// Returns the first iteration at which some lane converges together with the
/// lowest such lane, or `None` if every lane diverged or hit its cap first.
/// Lanes still running at that point cannot do better under the (iterations,
/// ω) ordering, so stopping there loses nothing.
fn lockstep_first_convergence(
    sys: &LinearSystem,
    omegas: &[f64],
    caps: &[usize],
    x0: &[f64],
    tol: f64,
    ceiling: f64,
) -> Result<Option<(usize, usize)>> {
    debug_assert!(omegas.len() <= LANES && omegas.len() == caps.len());
    debug_assert!(omegas.windows(2).all(|w| w[0] < w[1]));
    let a = sys.matrix();
    let (offsets, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    let (b, d) = (sys.rhs(), sys.diagonal());
    let dim = sys.dim();

    let mut x: Vec<[f64; LANES]> = x0.iter().map(|v| [*v; LANES]).collect();
    let mut r = vec![[0.0; LANES]; dim];
    let residual = |x: &[[f64; LANES]], r: &mut [[f64; LANES]]| -> [f64; LANES] {
        let mut sq = [0.0; LANES];
        for i in 0..dim {
            let mut ax = [0.0; LANES];
            for p in offsets[i]..offsets[i + 1] {
                let (v, xj) = (vals[p], &x[cols[p]]);
                for l in 0..LANES {
                    ax[l] += v * xj[l];
                }
            }
            let ri = &mut r[i];
            for l in 0..LANES {
                ri[l] = (b[i] - ax[l]) / d[i];
                sq[l] += ri[l] * ri[l];
            }
        }
        sq
    };

    let r0 = residual(&x, &mut r)[0].sqrt();
    if !r0.is_finite() {
        return Err(Error::NonFinite("initial residual".into()));
    }
    if r0 == 0.0 {
        return Err(Error::ZeroInitialResidual);
    }

    let mut omega = [0.0; LANES];
    let mut alive = [false; LANES];
    for (l, w) in omegas.iter().enumerate() {
        omega[l] = *w;
        alive[l] = caps[l] > 0;
    }
    let max_cap = caps.iter().copied().max().unwrap_or(0);
    for t in 1..=max_cap {
        if !alive.iter().any(|a| *a) {
            return Ok(None);
        }
        let mut max_abs = [0.0f64; LANES];
        for (xi, ri) in x.iter_mut().zip(&r) {
            for l in 0..LANES {
                xi[l] += omega[l] * ri[l];
                max_abs[l] = nan_max(max_abs[l], xi[l].abs());
            }
        }
        let sq = residual(&x, &mut r);
        let mut winner = None;
        for l in 0..LANES {
            if !alive[l] {
                continue;
            }
            let rres = sq[l].sqrt() / r0;
            if !(max_abs[l] <= DIVERGENCE_LIMIT) || rres > ceiling || t >= caps[l] {
                if max_abs[l] <= DIVERGENCE_LIMIT && rres < tol && winner.is_none() {
                    winner = Some(l);
                }
                alive[l] = false;
            } else if rres < tol && winner.is_none() {
                winner = Some(l);
            }
        }
        if let Some(l) = winner {
            return Ok(Some((t, l)));
        }
        // Retire finished lanes so overflowing values do not linger.
        for l in 0..LANES {
            if !alive[l] && omega[l] != 0.0 {
                omega[l] = 0.0;
                for (xi, ri) in x.iter_mut().zip(r.iter_mut()) {
                    xi[l] = 0.0;
                    ri[l] = 0.0;
                }
            }
        }
    }
    Ok(None)
}

/// Minimum-iteration weight on `grid`, ties going to the smaller ω.
///
/// The traversal starts at the grid point nearest 1 (plain Jacobi) and moves
/// outwards in batches. Once a best count is known, later runs are capped just
/// low enough that only a strictly better candidate can finish, so the result
/// is identical to [`grid_search_omega_exhaustive`] at a fraction of the cost.
pub fn grid_search_omega(
    sys: &LinearSystem,
    grid: &OmegaGrid,
    cfg: &SolverConfig,
) -> Result<TrainingSample> {
    cfg.validate()?;
    let x0 = initial_guess(sys)?.x0;
    let ceiling = divergence_ceiling(sys, cfg.tol);
    let start = grid.nearest_index(1.0);
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by_key(|k| (k.abs_diff(start), *k));

    let mut best: Option<(usize, usize)> = None;
    for chunk in order.chunks(LANES) {
        let mut batch = chunk.to_vec();
        batch.sort_unstable();
        let caps: Vec<usize> = batch
            .iter()
            .map(|k| {
                let cap = match best {
                    None => cfg.max_iter,
                    Some((iters, bk)) if *k < bk => iters,
                    Some((iters, _)) => iters - 1,
                };
                cap.min(cfg.max_iter)
            })
            .collect();
        let omegas: Vec<f64> = batch.iter().map(|k| grid.value(*k)).collect();
        if let Some((iters, lane)) =
            lockstep_first_convergence(sys, &omegas, &caps, &x0, cfg.tol, ceiling)?
        {
            let k = batch[lane];
            if best.map_or(true, |b| (iters, k) < b) {
                best = Some((iters, k));
            }
        }
    }
    let (iterations, k) = best.ok_or(Error::NoConvergentOmega)?;
    log::info!(
        "{} n={}: omega* = {} ({} iterations)",
        sys.problem_id,
        sys.n_grid,
        grid.value(k),
        iterations
    );
    Ok(TrainingSample {
        n: sys.n_grid,
        omega_star: grid.value(k),
        iterations_at_star: iterations,
        method: SampleMethod::GridTraversal,
    })
}

/// Runs every grid point to completion (or `cfg.max_iter`) and returns the
/// full iteration profile along with the argmin.
pub fn grid_search_omega_exhaustive(
    sys: &LinearSystem,
    grid: &OmegaGrid,
    cfg: &SolverConfig,
) -> Result<(TrainingSample, Vec<GridPoint>)> {
    cfg.validate()?;
    let x0 = initial_guess(sys)?.x0;
    let mut points = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let run_cfg = SolverConfig {
            omega: grid.value(k),
            record_history: false,
            ..*cfg
        };
        let (report, _) = weighted_jacobi_solve_bounded(sys, &run_cfg, &x0, f64::INFINITY)?;
        points.push(GridPoint {
            omega: run_cfg.omega,
            iterations: report.iterations,
            converged: report.converged,
        });
    }
    let best = points
        .iter()
        .filter(|p| p.converged)
        .min_by(|a, b| {
            a.iterations
                .cmp(&b.iterations)
                .then(a.omega.total_cmp(&b.omega))
        })
        .ok_or(Error::NoConvergentOmega)?;
    let sample = TrainingSample {
        n: sys.n_grid,
        omega_star: best.omega,
        iterations_at_star: best.iterations,
        method: SampleMethod::GridTraversal,
    };
    Ok((sample, points))
}

/// ω_opt from the spectrum plus the iteration count it achieves.
pub fn spectral_sample(sys: &LinearSystem, cfg: &SolverConfig) -> Result<TrainingSample> {
    let omega = omega_opt_spectral(&spectrum_of_jacobi_operator(sys)?)?;
    let x0 = initial_guess(sys)?.x0;
    let run_cfg = SolverConfig {
        omega,
        record_history: false,
        ..*cfg
    };
    let (report, _) = weighted_jacobi_solve_bounded(sys, &run_cfg, &x0, f64::INFINITY)?;
    Ok(TrainingSample {
        n: sys.n_grid,
        omega_star: omega,
        iterations_at_star: report.iterations,
        method: SampleMethod::Spectral,
    })
}

/// Builds each system and finds its best ω; samples come back in ascending
/// `n` with duplicates removed.
pub fn generate_training_set(
    problem: ProblemId,
    sizes: &[usize],
    params: &ProblemParams,
    grid: &OmegaGrid,
    cfg: &SolverConfig,
    method: SampleMethod,
) -> Result<Vec<TrainingSample>> {
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("no training sizes given".into()));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|n| {
            let sys = build_problem(problem, n, params)?;
            match method {
                SampleMethod::GridTraversal => grid_search_omega(&sys, grid, cfg),
                SampleMethod::Spectral => spectral_sample(&sys, cfg),
            }
        })
        .collect()
}

pub const TRAINING_CSV_HEADER: &str = "n,omega_star,iterations,method";

pub fn write_training_csv<W: Write>(samples: &[TrainingSample], mut out: W) -> Result<()> {
    writeln!(out, "{TRAINING_CSV_HEADER}")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{}",
            s.n, s.omega_star, s.iterations_at_star, s.method
        )?;
    }
    Ok(())
}

pub fn read_training_csv<R: BufRead>(input: R) -> Result<Vec<TrainingSample>> {
    let mut samples = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if idx == 0 {
            if line != TRAINING_CSV_HEADER {
                return Err(Error::parse(
                    1,
                    format!("expected header '{TRAINING_CSV_HEADER}'"),
                ));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::parse(idx + 1, "expected 4 fields"));
        }
        let bad = |what: &str| Error::parse(idx + 1, format!("bad {what}"));
        samples.push(TrainingSample {
            n: fields[0].parse().map_err(|_| bad("n"))?,
            omega_star: fields[1].parse().map_err(|_| bad("omega_star"))?,
            iterations_at_star: fields[2].parse().map_err(|_| bad("iterations"))?,
            method: fields[3].parse().map_err(|_| bad("method"))?,
        });
    }
    if samples.is_empty() {
        return Err(Error::parse(1, "no samples"));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{build_tridiag, TridiagSpec};
    use crate::problems::{build_convdiff3d, convdiff3d_r};
    use std::io::Cursor;

    pub(crate) fn system_from(a: CsrMatrix) -> LinearSystem {
        let n = a.nrows();
        LinearSystem::new(
            a,
            vec![1.0; n],
            n,
            ProblemId::ConvDiff3d,
            ProblemParams::default(),
            None,
        )
        .unwrap()
    }

    fn laplace_1d(n: usize) -> LinearSystem {
        system_from(build_tridiag(TridiagSpec::new(n, -1.0, 2.0, -1.0)).unwrap())
    }

    #[test]
    fn grid_layout() {
        let g = OmegaGrid::default();
        assert_eq!(g.len(), 1501);
        assert_eq!(g.value(0), 0.5);
        assert_eq!(g.value(500), 1.0);
        assert_eq!(g.value(1500), 2.0);
        assert_eq!(g.nearest_index(1.0), 500);
        assert!(OmegaGrid::new(1.0, 0.5, 0.1).is_err());
        assert!(OmegaGrid::new(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn tridiagonal_spectrum() {
        let eig = jacobi_eigenvalues(&laplace_1d(3)).unwrap();
        let h = 2f64.sqrt() / 2.0;
        for (got, want) in eig.iter().zip([1.0 - h, 1.0, 1.0 + h]) {
            assert!((got - want).abs() < 1e-12);
        }
        let spec = spectrum_of_jacobi_operator(&system_from(CsrMatrix::identity(4))).unwrap();
        assert_eq!(
            (spec.lambda_min, spec.lambda_max, spec.exact),
            (1.0, 1.0, true)
        );
    }

    #[test]
    fn convdiff_spectrum_matches_kronecker_sum() {
        for n in 2..=8 {
            let sys = build_convdiff3d(n).unwrap();
            let r = convdiff3d_r(n);
            let s = (1.0 - r * r).sqrt();
            let one_d: Vec<f64> = (1..=n)
                .map(|k| 2.0 * s * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
                .collect();
            let mut expected = Vec::new();
            for a in &one_d {
                for b in &one_d {
                    for c in &one_d {
                        expected.push(1.0 + (a + b + c) / 6.0);
                    }
                }
            }
            expected.sort_by(f64::total_cmp);
            let got = jacobi_eigenvalues(&sys).unwrap();
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).abs() < 1e-8, "n={n}: {g} vs {e}");
            }
        }
        let spec = spectrum_of_jacobi_operator(&build_convdiff3d(4).unwrap()).unwrap();
        assert!(spec.lambda_min > 0.0 && spec.lambda_max < 2.0);
    }

    #[test]
    fn upwind_jacobi_radius_matches_closed_form() {
        // upwind 1D stencil (-a-b, 2a+b, -a) with a = eps/h², b = beta/h; the
        // Jacobi radius of the Kronecker sum is 2 sqrt(a(a+b)) cos(pi h) / (2a+b)
        let params = ProblemParams::default();
        let mut last = 0.0;
        for n in [3, 4, 6, 8] {
            let sys = build_problem(ProblemId::SmallDiffConvDiff3d, n, &params).unwrap();
            let rho = jacobi_eigenvalues(&sys)
                .unwrap()
                .iter()
                .map(|l| (1.0 - l).abs())
                .fold(0.0, f64::max);
            let h = 1.0 / (n as f64 + 1.0);
            let a = params.epsilon / (h * h);
            let c = a + params.beta / h;
            let want = 2.0 * (a * c).sqrt() * (std::f64::consts::PI * h).cos() / (a + c);
            assert!((rho - want).abs() < 1e-12, "n={n}: {rho} vs {want}");
            assert!(rho > last && rho < 1.0);
            last = rho;
        }
    }

    #[test]
    fn sign_mismatch_is_not_symmetrizable() {
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![-1.0, 2.0]]).unwrap();
        assert!(matches!(
            symmetrize_jacobi_operator(&system_from(a)),
            Err(Error::NotSymmetrizable(_))
        ));
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!(symmetrize_jacobi_operator(&system_from(a)).is_err());
    }

    #[test]
    fn inconsistent_cycle_is_rejected() {
        // 3-cycle whose scaling ratios do not multiply to one
        let a = CsrMatrix::from_dense(&[
            vec![4.0, 1.0, 1.0],
            vec![2.0, 4.0, 1.0],
            vec![1.0, 1.0, 4.0],
        ])
        .unwrap();
        assert!(symmetrize_jacobi_operator(&system_from(a)).is_err());
    }

    #[test]
    fn power_method_agrees_with_dense() {
        let sys = build_convdiff3d(8).unwrap();
        let sym = symmetrize_jacobi_operator(&sys).unwrap();
        let approx = power_spectrum(&sym.matrix, 1e-9, 500_000).unwrap();
        let exact = spectrum_of_jacobi_operator(&sys).unwrap();
        assert!(!approx.exact);
        assert!((approx.lambda_max - exact.lambda_max).abs() < 1e-6 * exact.lambda_max);
        assert!((approx.lambda_min - exact.lambda_min).abs() < 1e-5);
    }

    #[test]
    fn spectral_formulas() {
        let s = SpectrumEstimate::new(1.0, 3.0, true).unwrap();
        assert_eq!(omega_opt_spectral(&s).unwrap(), 0.5);
        assert_eq!(spectral_radius_wji(&s, 0.5), 0.5);
        assert_eq!(spectral_radius_wji(&s, 1.0), 2.0);
        let s = SpectrumEstimate::new(1.0, 1.0, true).unwrap();
        assert_eq!(omega_opt_spectral(&s).unwrap(), 1.0);
        let s = SpectrumEstimate::new(2.5, 2.5, true).unwrap();
        let w = omega_opt_spectral(&s).unwrap();
        assert_eq!(w, 0.4);
        assert_eq!(spectral_radius_wji(&s, w), 0.0);
        let s = SpectrumEstimate::new(-1.0, 2.0, true).unwrap();
        assert!(matches!(
            omega_opt_spectral(&s),
            Err(Error::MixedSignSpectrum { .. })
        ));
        assert!(SpectrumEstimate::new(2.0, 1.0, true).is_err());
    }

    #[test]
    fn identity_grid_search_returns_one() {
        let sys = system_from(CsrMatrix::identity(3));
        let s = grid_search_omega(&sys, &OmegaGrid::default(), &training_solver_config()).unwrap();
        assert_eq!(s.omega_star, 1.0);
        assert_eq!(s.iterations_at_star, 1);
    }

    #[test]
    fn laplace_1d_grid_search_near_one() {
        let sys = laplace_1d(5);
        let grid = OmegaGrid::default();
        let cfg = training_solver_config();
        let pruned = grid_search_omega(&sys, &grid, &cfg).unwrap();
        let (full, _) = grid_search_omega_exhaustive(&sys, &grid, &cfg).unwrap();
        assert_eq!(pruned, full);
        assert!(
            (pruned.omega_star - 1.0).abs() <= grid.step() + 1e-12,
            "{pruned:?}"
        );
    }

    #[test]
    fn pruned_search_matches_exhaustive_on_coarse_grid() {
        let sys = build_convdiff3d(4).unwrap();
        let grid = OmegaGrid::new(0.5, 2.0, 0.01).unwrap();
        let cfg = training_solver_config();
        let pruned = grid_search_omega(&sys, &grid, &cfg).unwrap();
        let (full, points) = grid_search_omega_exhaustive(&sys, &grid, &cfg).unwrap();
        assert_eq!(pruned, full);
        assert_eq!(points.len(), grid.len());
    }

    #[test]
    fn pruned_search_matches_exhaustive_on_all_problems() {
        let grid = OmegaGrid::new(0.5, 2.0, 0.003).unwrap();
        let cfg = SolverConfig::default().with_max_iter(20_000);
        for (problem, n) in [
            (ProblemId::ConvDiff3d, 5),
            (ProblemId::SmallDiffConvDiff3d, 4),
            (ProblemId::Laplace2dNeumann, 7),
        ] {
            let sys = build_problem(problem, n, &ProblemParams::default()).unwrap();
            let pruned = grid_search_omega(&sys, &grid, &cfg);
            let full = grid_search_omega_exhaustive(&sys, &grid, &cfg).map(|(s, _)| s);
            match (pruned, full) {
                (Ok(p), Ok(f)) => assert_eq!(p, f, "{problem} n={n}"),
                (Err(Error::NoConvergentOmega), Err(Error::NoConvergentOmega)) => {}
                (p, f) => panic!("{problem} n={n}: {p:?} vs {f:?}"),
            }
        }
    }

    #[test]
    fn no_convergent_omega() {
        // D^-1 A has eigenvalues -1 and 3: mixed signs, no ω in (0, 2] converges
        // (b = (1, 0) excites both eigenvectors)
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let sys = LinearSystem::new(
            a,
            vec![1.0, 0.0],
            2,
            ProblemId::ConvDiff3d,
            ProblemParams::default(),
            None,
        )
        .unwrap();
        let grid = OmegaGrid::new(0.5, 2.0, 0.1).unwrap();
        assert!(matches!(
            grid_search_omega(&sys, &grid, &SolverConfig::default().with_max_iter(2000)),
            Err(Error::NoConvergentOmega)
        ));
    }

    #[test]
    fn training_csv_round_trip() {
        let samples = vec![
            TrainingSample {
                n: 5,
                omega_star: 1.001,
                iterations_at_star: 40,
                method: SampleMethod::GridTraversal,
            },
            TrainingSample {
                n: 10,
                omega_star: 0.9999999999999999,
                iterations_at_star: 150,
                method: SampleMethod::Spectral,
            },
        ];
        let mut buf = Vec::new();
        write_training_csv(&samples, &mut buf).unwrap();
        assert_eq!(read_training_csv(Cursor::new(buf)).unwrap(), samples);
        assert!(read_training_csv(Cursor::new("n,omega\n1,2\n")).is_err());
    }

    #[test]
    fn training_set_is_sorted_and_deduplicated() {
        let grid = OmegaGrid::new(0.8, 1.2, 0.05).unwrap();
        let samples = generate_training_set(
            ProblemId::ConvDiff3d,
            &[4, 2, 4],
            &ProblemParams::default(),
            &grid,
            &training_solver_config(),
            SampleMethod::GridTraversal,
        )
        .unwrap();
        assert_eq!(samples.iter().map(|s| s.n).collect::<Vec<_>>(), vec![2, 4]);
    }
}
