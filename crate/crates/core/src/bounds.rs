//! Numerical checks of the error bounds and convergence conditions.
//!
//! Synthetic targets are finite kernel expansions `f = Σ β_j κ(·, x_j)`, whose
//! RKHS norm `βᵀKβ` is exact. For such `f` and a noise-free GPR fit
//!
//! ```text
//! |f(z) − f*(z)|² ≤ ‖f‖²_H · Var(f*(z)).
//! ```
//!
//! With noisy targets `y = f(X) + ε` and regularization `σ_n²`, Cauchy–Schwarz
//! applied to the pair `(f, ε/σ_n)` gives the same inequality with constant
//! `‖f‖²_H + ‖ε‖²/σ_n²` and the regularized variance.
//!
//! For weighted Jacobi with a real spectrum of one sign, the weight `ω*`
//! converges whenever `|ω* − ω_opt|` stays below `2λ_min/(λ_max(λ_max+λ_min))`
//! (positive spectrum) or `−2λ_max/(λ_min(λ_max+λ_min))` (negative spectrum).

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gpr::{GprModel, MeanMode};
use crate::kernels::{cross_kernel_vector, distance, eval_kernel, kernel_matrix, KernelSpec};
use crate::linalg::dense_eig_symmetric;
use crate::problems::LinearSystem;
use crate::tuning::{jacobi_eigenvalues, omega_opt_spectral, OmegaGrid, SpectrumEstimate};

/// Absolute slack allowed on `lhs − rhs` before a point counts as a violation.
pub const BOUND_SLACK: f64 = 1e-6;

/// Gram matrices with a larger condition number are rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Largest system accepted by the dense convergence checks.
pub const CONVERGENCE_CHECK_LIMIT: usize = 1000;

/// `f(·) = Σ_j β_j κ(·, x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RkhsFunction {
    pub centers: Vec<Vec<f64>>,
    pub betas: Vec<f64>,
    pub kernel: KernelSpec,
}

impl RkhsFunction {
    pub fn new(centers: Vec<Vec<f64>>, betas: Vec<f64>, kernel: KernelSpec) -> Result<Self> {
        if centers.is_empty() || centers.len() != betas.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} centers and {} coefficients",
                centers.len(),
                betas.len()
            )));
        }
        kernel.validate()?;
        Ok(Self {
            centers,
            betas,
            kernel,
        })
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        eval_rkhs(self, z)
    }

    /// The expansion of `self + other` (same kernel required).
    pub fn plus(&self, other: &RkhsFunction) -> Result<RkhsFunction> {
        if self.kernel != other.kernel {
            return Err(Error::InvalidArgument(
                "expansions use different kernels".into(),
            ));
        }
        let mut centers = self.centers.clone();
        centers.extend(other.centers.iter().cloned());
        let mut betas = self.betas.clone();
        betas.extend_from_slice(&other.betas);
        RkhsFunction::new(centers, betas, self.kernel)
    }
}

/// `βᵀ K β` over the centers.
pub fn rkhs_norm_sq(f: &RkhsFunction) -> Result<f64> {
    let k = kernel_matrix(&f.kernel, &f.centers)?.values;
    let b = nalgebra::DVector::from_column_slice(&f.betas);
    Ok((b.transpose() * k * &b)[(0, 0)])
}

pub fn eval_rkhs(f: &RkhsFunction, z: &[f64]) -> Result<f64> {
    let k = cross_kernel_vector(&f.kernel, &f.centers, z)?;
    Ok(k.iter().zip(&f.betas).map(|(a, b)| a * b).sum())
}

/// Residual of the decomposition
/// `f(z) = Σ_i f(ξ_i) p_i(z) + ⟨f, κ(·,z) − Σ_i p_i(z) κ(·,ξ_i)⟩_H`.
///
/// `p_at_z[i]` is `p_i(z)`. The inner product is evaluated through the
/// expansion of `f`, so the identity holds for any coefficients.
pub fn verify_decomposition_identity(
    f: &RkhsFunction,
    xi: &[Vec<f64>],
    p_at_z: &[f64],
    z: &[f64],
) -> Result<f64> {
    if xi.len() != p_at_z.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} basis points and {} basis values",
            xi.len(),
            p_at_z.len()
        )));
    }
    let fz = eval_rkhs(f, z)?;
    let mut interpolant = 0.0;
    for (x, p) in xi.iter().zip(p_at_z) {
        interpolant += eval_rkhs(f, x)? * p;
    }
    let mut inner = 0.0;
    for (c, beta) in f.centers.iter().zip(&f.betas) {
        let mut term = eval_kernel(&f.kernel, z, c)?;
        for (x, p) in xi.iter().zip(p_at_z) {
            term -= p * eval_kernel(&f.kernel, x, c)?;
        }
        inner += beta * term;
    }
    Ok((fz - interpolant - inner).abs())
}

/// `(1, z, z², …)` with `q` entries.
pub fn monomials(z: f64, q: usize) -> Vec<f64> {
    (0..q).map(|k| z.powi(k as i32)).collect()
}

/// `max_i λ_i / min_i λ_i` of a symmetric matrix; infinite if not positive
/// definite.
pub fn condition_number(a: &DMatrix<f64>) -> Result<f64> {
    let eig = dense_eig_symmetric(a)?;
    let (lo, hi) = (eig[0], eig[eig.len() - 1]);
    Ok(if lo > 0.0 { hi / lo } else { f64::INFINITY })
}

/// Noise realization used for the noisy bound.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyObservations {
    pub noise_var: f64,
    /// `ε_i` added to `f(x_i)`.
    pub noise: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointBound {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; zero when both vanish.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub test_points: usize,
    pub max_lhs: f64,
    /// Largest `lhs / rhs` over points whose `rhs` exceeds [`BOUND_SLACK`];
    /// below that the ratio is dominated by rounding.
    pub max_rhs_ratio: f64,
    /// The constant multiplying the variance.
    pub c: f64,
    pub violations: usize,
    pub condition_number: f64,
    pub points: Vec<PointBound>,
}

/// Fits a zero-mean GPR to `f` on `train_x` (exactly, or with the given noise)
/// and compares `|f − f*|²` against `C·Var(f*)` at each test point.
pub fn verify_pointwise_bound(
    f: &RkhsFunction,
    train_x: &[Vec<f64>],
    test_z: &[Vec<f64>],
    noisy: Option<&NoisyObservations>,
) -> Result<BoundReport> {
    if train_x.is_empty() || test_z.is_empty() {
        return Err(Error::InvalidArgument("empty training or test set".into()));
    }
    let noise_var = noisy.map_or(0.0, |n| n.noise_var);
    if let Some(n) = noisy {
        if !(n.noise_var > 0.0) || n.noise.len() != train_x.len() {
            return Err(Error::InvalidArgument(
                "noisy observations need a positive variance and one noise value per point".into(),
            ));
        }
    }
    let mut gram = kernel_matrix(&f.kernel, train_x)?.values;
    for i in 0..gram.nrows() {
        gram[(i, i)] += noise_var;
    }
    let condition = condition_number(&gram)?;
    if !(condition <= MAX_GRAM_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }

    let mut y = train_x
        .iter()
        .map(|x| eval_rkhs(f, x))
        .collect::<Result<Vec<_>>>()?;
    let mut c = rkhs_norm_sq(f)?;
    if let Some(n) = noisy {
        for (yi, e) in y.iter_mut().zip(&n.noise) {
            *yi += e;
        }
        c += n.noise.iter().map(|e| e * e).sum::<f64>() / n.noise_var;
    }
    let model = GprModel::fit(train_x, &y, f.kernel, 0.0, noise_var, MeanMode::Zero)?;

    let mut points = Vec::with_capacity(test_z.len());
    for z in test_z {
        let pred = model.predict(z)?;
        let err = eval_rkhs(f, z)? - pred.mean;
        let lhs = err * err;
        let rhs = c * pred.variance;
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        points.push(PointBound { lhs, rhs, ratio });
    }
    Ok(BoundReport {
        test_points: points.len(),
        max_lhs: points.iter().map(|p| p.lhs).fold(0.0, f64::max),
        max_rhs_ratio: points
            .iter()
            .filter(|p| p.rhs > BOUND_SLACK)
            .map(|p| p.ratio)
            .fold(0.0, f64::max),
        c,
        violations: points
            .iter()
            .filter(|p| p.lhs - p.rhs > BOUND_SLACK)
            .count(),
        condition_number: condition,
        points,
    })
}

/// `sup_{x ∈ domain} min_j ‖x − x_j‖` over the sampled domain.
pub fn fill_distance(x: &[Vec<f64>], domain: &[Vec<f64>]) -> Result<f64> {
    if x.is_empty() || domain.is_empty() {
        return Err(Error::InvalidArgument(
            "fill distance needs nonempty point sets".into(),
        ));
    }
    let mut h = 0.0f64;
    for d in domain {
        let mut nearest = f64::INFINITY;
        for p in x {
            nearest = nearest.min(distance(d, p)?);
        }
        h = h.max(nearest);
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionBranch {
    PositiveSpectrum,
    NegativeSpectrum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionDecision {
    pub condition_holds: bool,
    pub threshold: f64,
    pub branch: ConditionBranch,
}

/// Compares `err_bound` (e.g. `|ω* − ω_opt|` or a sup-norm prediction error)
/// with the sufficient threshold for the sign of the spectrum.
pub fn check_wji_convergence_condition(
    spec: &SpectrumEstimate,
    err_bound: f64,
) -> Result<ConditionDecision> {
    let (lmin, lmax) = (spec.lambda_min, spec.lambda_max);
    if !(lmin * lmax > 0.0) {
        return Err(Error::MixedSignSpectrum {
            lambda_min: lmin,
            lambda_max: lmax,
        });
    }
    if !(err_bound >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "error bound must be non-negative, got {err_bound}"
        )));
    }
    let (threshold, branch) = if lmin > 0.0 {
        (
            2.0 * lmin / (lmax * (lmax + lmin)),
            ConditionBranch::PositiveSpectrum,
        )
    } else {
        (
            -2.0 * lmax / (lmin * (lmax + lmin)),
            ConditionBranch::NegativeSpectrum,
        )
    };
    Ok(ConditionDecision {
        condition_holds: err_bound <= threshold,
        threshold,
        branch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceCheck {
    pub omega_star: f64,
    pub omega_opt: f64,
    /// `ρ(I − ω* D⁻¹A)` from all eigenvalues.
    pub rho: f64,
    /// `|λ_max − λ_min| / |λ_max + λ_min|`, the radius at `ω_opt`.
    pub rho_opt: f64,
    /// `rho_opt + |ω* − ω_opt| · max|λ|`.
    pub proof_bound: f64,
    pub bound_holds: bool,
    pub condition: ConditionDecision,
}

impl ConvergenceCheck {
    pub fn converges(&self) -> bool {
        self.rho < 1.0
    }

    /// The sufficient condition held but the iteration does not converge.
    pub fn is_violation(&self) -> bool {
        self.condition.condition_holds && !self.converges()
    }
}

fn check_with_eigenvalues(eig: &[f64], omega_star: f64) -> Result<ConvergenceCheck> {
    let spec = SpectrumEstimate::new(eig[0], eig[eig.len() - 1], true)?;
    let omega_opt = omega_opt_spectral(&spec)?;
    let err = (omega_star - omega_opt).abs();
    let rho = eig
        .iter()
        .map(|l| (1.0 - omega_star * l).abs())
        .fold(0.0, f64::max);
    let (lmin, lmax) = (spec.lambda_min, spec.lambda_max);
    let rho_opt = ((lmax - lmin) / (lmax + lmin)).abs();
    let proof_bound = rho_opt + err * spec.max_abs();
    Ok(ConvergenceCheck {
        omega_star,
        omega_opt,
        rho,
        rho_opt,
        proof_bound,
        bound_holds: rho <= proof_bound * (1.0 + 1e-12) + 1e-15,
        condition: check_wji_convergence_condition(&spec, err)?,
    })
}

fn small_system_eigenvalues(sys: &LinearSystem) -> Result<Vec<f64>> {
    if sys.dim() > CONVERGENCE_CHECK_LIMIT {
        return Err(Error::TooLarge {
            dim: sys.dim(),
            limit: CONVERGENCE_CHECK_LIMIT,
        });
    }
    jacobi_eigenvalues(sys)
}

/// Exact spectral radius at `omega_star` versus the sufficient condition with
/// `err_bound = |ω* − ω_opt|`.
pub fn check_condition_implies_convergence(
    sys: &LinearSystem,
    omega_star: f64,
) -> Result<ConvergenceCheck> {
    check_with_eigenvalues(&small_system_eigenvalues(sys)?, omega_star)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSweep {
    pub checks: Vec<ConvergenceCheck>,
    /// Grid points where the condition held but `ρ ≥ 1`.
    pub violations: usize,
    /// Grid points where `ρ < 1` although the condition failed; these show the
    /// condition is not necessary and are recorded, not counted as failures.
    pub necessity_counterexamples: usize,
    /// Points where the radius exceeded the proof's bound.
    pub bound_failures: usize,
    /// `|ρ(ω_opt) − (λ_max−λ_min)/(λ_max+λ_min)|`.
    pub rho_opt_error: f64,
}

/// Runs [`check_condition_implies_convergence`] over every grid weight.
pub fn convergence_sweep(sys: &LinearSystem, grid: &OmegaGrid) -> Result<ConvergenceSweep> {
    let eig = small_system_eigenvalues(sys)?;
    let checks = grid
        .values()
        .into_iter()
        .map(|w| check_with_eigenvalues(&eig, w))
        .collect::<Result<Vec<_>>>()?;
    let at_opt = check_with_eigenvalues(&eig, checks[0].omega_opt)?;
    Ok(ConvergenceSweep {
        violations: checks.iter().filter(|c| c.is_violation()).count(),
        necessity_counterexamples: checks
            .iter()
            .filter(|c| c.converges() && !c.condition.condition_holds)
            .count(),
        bound_failures: checks.iter().filter(|c| !c.bound_holds).count(),
        rho_opt_error: (at_opt.rho - at_opt.rho_opt).abs(),
        checks,
    })
}

/// Seeded random instances for the bound suites.
#[derive(Debug, Clone)]
pub struct BoundInstance {
    pub seed: u64,
    pub f: RkhsFunction,
    pub train_x: Vec<Vec<f64>>,
    pub test_z: Vec<Vec<f64>>,
    pub noisy: Option<NoisyObservations>,
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect()
}

/// Draws a Gaussian-kernel instance: dimension 1–3, up to 8 centers and 8
/// training points, 16 random test points plus the training points. Draws are
/// repeated until the training Gram matrix (with the noise variance added) has
/// condition number at most [`MAX_GRAM_CONDITION`].
pub fn random_bound_instance(seed: u64, noise_var: Option<f64>) -> Result<BoundInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    for _ in 0..1000 {
        let dim = rng.gen_range(1..=3);
        let kernel = KernelSpec::gaussian(rng.gen_range(0.5..2.0), rng.gen_range(0.1..0.8));
        let m = rng.gen_range(1..=8);
        let centers: Vec<Vec<f64>> = (0..m).map(|_| random_point(&mut rng, dim)).collect();
        let betas: Vec<f64> = (0..m).map(|_| std_normal.sample(&mut rng)).collect();
        let n = rng.gen_range(1..=8);
        let train_x: Vec<Vec<f64>> = (0..n).map(|_| random_point(&mut rng, dim)).collect();
        let mut test_z: Vec<Vec<f64>> = (0..16).map(|_| random_point(&mut rng, dim)).collect();
        test_z.extend(train_x.iter().cloned());
        let noisy = noise_var.map(|v| NoisyObservations {
            noise_var: v,
            noise: (0..n)
                .map(|_| v.sqrt() * std_normal.sample(&mut rng))
                .collect(),
        });
        let mut gram = kernel_matrix(&kernel, &train_x)?.values;
        for i in 0..n {
            gram[(i, i)] += noise_var.unwrap_or(0.0);
        }
        if condition_number(&gram)? <= MAX_GRAM_CONDITION {
            return Ok(BoundInstance {
                seed,
                f: RkhsFunction::new(centers, betas, kernel)?,
                train_x,
                test_z,
                noisy,
            });
        }
    }
    Err(Error::IllConditioned {
        condition: f64::INFINITY,
    })
}

/// Per-instance outcome of a bound suite.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceRecord {
    pub seed: u64,
    pub noise_var: f64,
    pub max_lhs: f64,
    pub max_rhs: f64,
    pub max_ratio: f64,
    pub c: f64,
    pub condition_number: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub records: Vec<InstanceRecord>,
    pub violations: usize,
    pub max_ratio: f64,
}

/// Runs `instances` seeded pointwise-bound checks. With an empty
/// `noise_vars` the instances are noise-free; otherwise instance `i` uses
/// `noise_vars[i % len]`.
pub fn run_pointwise_suite(
    instances: usize,
    seed: u64,
    noise_vars: &[f64],
) -> Result<SuiteSummary> {
    let mut records = Vec::with_capacity(instances);
    for i in 0..instances {
        let s = seed.wrapping_add(i as u64);
        let noise_var = (!noise_vars.is_empty()).then(|| noise_vars[i % noise_vars.len()]);
        let inst = random_bound_instance(s, noise_var)?;
        let report =
            verify_pointwise_bound(&inst.f, &inst.train_x, &inst.test_z, inst.noisy.as_ref())?;
        records.push(InstanceRecord {
            seed: s,
            noise_var: noise_var.unwrap_or(0.0),
            max_lhs: report.max_lhs,
            max_rhs: report.points.iter().map(|p| p.rhs).fold(0.0, f64::max),
            max_ratio: report.max_rhs_ratio,
            c: report.c,
            condition_number: report.condition_number,
            violations: report.violations,
        });
    }
    Ok(SuiteSummary {
        violations: records.iter().map(|r| r.violations).sum(),
        max_ratio: records.iter().map(|r| r.max_ratio).fold(0.0, f64::max),
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionRecord {
    pub seed: u64,
    pub residual: f64,
    pub f_at_z: f64,
    pub basis_size: usize,
}

impl DecompositionRecord {
    /// Residual relative to `1 + |f(z)|`.
    pub fn scaled_residual(&self) -> f64 {
        self.residual / (1.0 + self.f_at_z.abs())
    }
}

/// Seeded decomposition-identity instances: random expansions, `q ∈ 0..=3`
/// basis points, and either monomials (scalar inputs) or arbitrary
/// coefficients for `p_i(z)`.
pub fn run_decomposition_suite(instances: usize, seed: u64) -> Result<Vec<DecompositionRecord>> {
    let mut out = Vec::with_capacity(instances);
    for i in 0..instances {
        let s = seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let dim = rng.gen_range(1..=3);
        let kernel = KernelSpec::gaussian(rng.gen_range(0.5..2.0), rng.gen_range(0.1..1.0));
        let m = rng.gen_range(1..=8);
        let centers: Vec<Vec<f64>> = (0..m).map(|_| random_point(&mut rng, dim)).collect();
        let betas: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f = RkhsFunction::new(centers, betas, kernel)?;
        let q = rng.gen_range(0..=3);
        let xi: Vec<Vec<f64>> = (0..q).map(|_| random_point(&mut rng, dim)).collect();
        let z = random_point(&mut rng, dim);
        let p = if dim == 1 {
            monomials(z[0], q)
        } else {
            (0..q).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        out.push(DecompositionRecord {
            seed: s,
            residual: verify_decomposition_identity(&f, &xi, &p, &z)?,
            f_at_z: f.eval(&z)?,
            basis_size: q,
        });
    }
    Ok(out)
}

pub fn write_pointwise_csv<W: Write>(summary: &SuiteSummary, mut out: W) -> Result<()> {
    writeln!(
        out,
        "seed,noise_var,lhs,rhs,ratio,c,condition_number,violations"
    )?;
    for r in &summary.records {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            r.seed,
            r.noise_var,
            r.max_lhs,
            r.max_rhs,
            r.max_ratio,
            r.c,
            r.condition_number,
            r.violations
        )?;
    }
    Ok(())
}

pub fn write_decomposition_csv<W: Write>(
    records: &[DecompositionRecord],
    mut out: W,
) -> Result<()> {
    writeln!(out, "seed,basis_size,f_at_z,residual,scaled_residual")?;
    for r in records {
        writeln!(
            out,
            "{},{},{:e},{:e},{:e}",
            r.seed,
            r.basis_size,
            r.f_at_z,
            r.residual,
            r.scaled_residual()
        )?;
    }
    Ok(())
}

pub fn write_convergence_csv<W: Write>(sweep: &ConvergenceSweep, mut out: W) -> Result<()> {
    writeln!(
        out,
        "omega,rho,proof_bound,threshold,err_bound,condition_holds,converges"
    )?;
    for c in &sweep.checks {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{},{}",
            c.omega_star,
            c.rho,
            c.proof_bound,
            c.condition.threshold,
            (c.omega_star - c.omega_opt).abs(),
            c.condition.condition_holds,
            c.converges()
        )?;
    }
    Ok(())
}
