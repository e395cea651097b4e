//! C interface to `gpr-jacobi`.
//!
//! Systems and models are opaque heap handles released with their `_free`
//! function. Every fallible call returns a [`GjStatus`]; after a failure,
//! [`gj_last_error_message`] describes it. No call unwinds across the
//! boundary: panics are caught and reported as `GJ_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gpr_jacobi::bench::train_models;
use gpr_jacobi::gpr::{normalize_size, GprModel, MeanMode};
use gpr_jacobi::kernels::KernelKind;
use gpr_jacobi::problems::{build_problem, LinearSystem, ProblemId, ProblemParams};
use gpr_jacobi::solver::{initial_guess, weighted_jacobi_solve, SolverConfig, Termination};
use gpr_jacobi::tuning::{
    grid_search_omega, omega_opt_spectral, spectrum_of_jacobi_operator, OmegaGrid, SampleMethod, TrainingSample,
};
use gpr_jacobi::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GjStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotConverged = 4,
    NumericalFailure = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GjProblem {
    Laplace2d = 0,
    ConvDiff3d = 1,
    SmallDiff3d = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GjKernel {
    Gaussian = 0,
    Periodic = 1,
    Additive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GjSolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    pub final_rres: f64,
    pub omega: f64,
}

/// Opaque linear system.
pub struct GjSystem {
    inner: LinearSystem,
}

/// Opaque fitted GP model.
pub struct GjModel {
    inner: GprModel,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> GjStatus {
    match e {
        Error::InvalidArgument(_) | Error::Parse { .. } | Error::TooLarge { .. } => GjStatus::InvalidArgument,
        Error::DimensionMismatch(_) => GjStatus::DimensionMismatch,
        Error::NoConvergentOmega | Error::NotConverged(_) => GjStatus::NotConverged,
        Error::Io(_) => GjStatus::Io,
        _ => GjStatus::NumericalFailure,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), GjStatus>) -> GjStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GjStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            GjStatus::Panic
        }
    }
}

fn fail(e: Error) -> GjStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

fn null(what: &str) -> GjStatus {
    set_error(format!("null pointer: {what}"));
    GjStatus::NullPointer
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gj_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds benchmark problem `problem` on an `n`-point grid with default
/// coefficients.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle owned by the
/// caller.
#[no_mangle]
pub unsafe extern "C" fn gj_system_build(problem: GjProblem, n: usize, out: *mut *mut GjSystem) -> GjStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let id = match problem {
            GjProblem::Laplace2d => ProblemId::Laplace2dNeumann,
            GjProblem::ConvDiff3d => ProblemId::ConvDiff3d,
            GjProblem::SmallDiff3d => ProblemId::SmallDiffConvDiff3d,
        };
        let sys = build_problem(id, n, &ProblemParams::default()).map_err(fail)?;
        *out = Box::into_raw(Box::new(GjSystem { inner: sys }));
        Ok(())
    })
}

/// # Safety
/// `sys` must be null or a handle from [`gj_system_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gj_system_free(sys: *mut GjSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of unknowns, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gj_system_dim(sys: *const GjSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.dim())
}

/// Weighted Jacobi from the default starting vector. If `x_out` is non-null
/// the final iterate is copied into it (`len` must equal the dimension).
/// Returns `GJ_STATUS_NOT_CONVERGED` when the run stopped without reaching
/// `tol`; the report is filled either way.
///
/// # Safety
/// `sys` and `report` must be valid; `x_out` null or `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gj_solve(
    sys: *const GjSystem,
    omega: f64,
    tol: f64,
    max_iter: usize,
    x_out: *mut f64,
    len: usize,
    report: *mut GjSolveReport,
) -> GjStatus {
    guard(|| {
        let sys = &sys.as_ref().ok_or_else(|| null("sys"))?.inner;
        let report = report.as_mut().ok_or_else(|| null("report"))?;
        if !x_out.is_null() && len != sys.dim() {
            return Err(fail(Error::DimensionMismatch(format!(
                "output buffer of length {len} for dimension {}",
                sys.dim()
            ))));
        }
        let cfg = SolverConfig {
            omega,
            tol,
            max_iter,
            record_history: false,
        };
        let x0 = initial_guess(sys).map_err(fail)?.x0;
        let (r, x) = weighted_jacobi_solve(sys, &cfg, &x0).map_err(fail)?;
        *report = GjSolveReport {
            iterations: r.iterations,
            converged: r.converged,
            diverged: r.termination == Termination::Diverged,
            final_rres: r.final_rres,
            omega: r.omega_used,
        };
        if !x_out.is_null() {
            ptr::copy_nonoverlapping(x.as_ptr(), x_out, len);
        }
        if !r.converged {
            set_error(format!("stopped after {} iterations without converging", r.iterations));
            return Err(GjStatus::NotConverged);
        }
        Ok(())
    })
}

/// `2 / (λ_min + λ_max)` of `D⁻¹A`.
///
/// # Safety
/// `sys` and `omega_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gj_spectral_omega(sys: *const GjSystem, omega_out: *mut f64) -> GjStatus {
    guard(|| {
        let sys = &sys.as_ref().ok_or_else(|| null("sys"))?.inner;
        let out = omega_out.as_mut().ok_or_else(|| null("omega_out"))?;
        *out = spectrum_of_jacobi_operator(sys)
            .and_then(|s| omega_opt_spectral(&s))
            .map_err(fail)?;
        Ok(())
    })
}

/// Weight with the fewest iterations on the grid `lo, lo+step, …, hi`.
///
/// # Safety
/// `sys`, `omega_out` and `iterations_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gj_grid_search(
    sys: *const GjSystem,
    lo: f64,
    hi: f64,
    step: f64,
    tol: f64,
    max_iter: usize,
    omega_out: *mut f64,
    iterations_out: *mut usize,
) -> GjStatus {
    guard(|| {
        let sys = &sys.as_ref().ok_or_else(|| null("sys"))?.inner;
        let omega_out = omega_out.as_mut().ok_or_else(|| null("omega_out"))?;
        let iterations_out = iterations_out.as_mut().ok_or_else(|| null("iterations_out"))?;
        let grid = OmegaGrid::new(lo, hi, step).map_err(fail)?;
        let cfg = SolverConfig {
            tol,
            max_iter,
            ..SolverConfig::default()
        };
        let s = grid_search_omega(sys, &grid, &cfg).map_err(fail)?;
        *omega_out = s.omega_star;
        *iterations_out = s.iterations_at_star;
        Ok(())
    })
}

/// Fits a GP with optimized hyperparameters to `len` pairs `(sizes[i], omegas[i])`.
///
/// # Safety
/// `sizes` and `omegas` must point to `len` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gj_model_fit(
    sizes: *const usize,
    omegas: *const f64,
    len: usize,
    kernel: GjKernel,
    jitter: f64,
    out: *mut *mut GjModel,
) -> GjStatus {
    guard(|| {
        if sizes.is_null() || omegas.is_null() || out.is_null() {
            return Err(null("sizes, omegas or out"));
        }
        let sizes = std::slice::from_raw_parts(sizes, len);
        let omegas = std::slice::from_raw_parts(omegas, len);
        let samples: Vec<TrainingSample> = sizes
            .iter()
            .zip(omegas)
            .map(|(&n, &w)| TrainingSample {
                n,
                omega_star: w,
                iterations_at_star: 0,
                method: SampleMethod::GridTraversal,
            })
            .collect();
        let kind = match kernel {
            GjKernel::Gaussian => KernelKind::Gaussian,
            GjKernel::Periodic => KernelKind::Periodic,
            GjKernel::Additive => KernelKind::Additive,
        };
        let mut models = train_models(&samples, &[kind], jitter, MeanMode::ConstantEmpirical).map_err(fail)?;
        let (_, model) = models.pop().expect("one model per kernel");
        *out = Box::into_raw(Box::new(GjModel { inner: model }));
        Ok(())
    })
}

/// Predicted weight and variance at grid size `n`.
///
/// # Safety
/// `model`, `mean_out` and `variance_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gj_model_predict(
    model: *const GjModel,
    n: usize,
    mean_out: *mut f64,
    variance_out: *mut f64,
) -> GjStatus {
    guard(|| {
        let model = &model.as_ref().ok_or_else(|| null("model"))?.inner;
        let mean_out = mean_out.as_mut().ok_or_else(|| null("mean_out"))?;
        let variance_out = variance_out.as_mut().ok_or_else(|| null("variance_out"))?;
        let p = model.predict(&normalize_size(n)).map_err(fail)?;
        *mean_out = p.mean;
        *variance_out = p.variance;
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`gj_model_fit`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gj_model_free(model: *mut GjModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
