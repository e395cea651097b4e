use std::ptr;

use gpr_jacobi_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { gj_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn build(problem: GjProblem, n: usize) -> *mut GjSystem {
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { gj_system_build(problem, n, &mut sys) }, GjStatus::Ok);
    assert!(!sys.is_null());
    sys
}

#[test]
fn solve_round_trip() {
    let sys = build(GjProblem::ConvDiff3d, 6);
    assert_eq!(unsafe { gj_system_dim(sys) }, 216);
    let mut x = vec![0.0; 216];
    let mut report = GjSolveReport::default();
    let status = unsafe { gj_solve(sys, 1.0, 1e-6, 10_000, x.as_mut_ptr(), x.len(), &mut report) };
    assert_eq!(status, GjStatus::Ok);
    assert!(report.converged && !report.diverged);
    assert!(report.final_rres < 1e-6);
    assert!(x.iter().any(|&v| v != 0.0));
    unsafe { gj_system_free(sys) };
}

#[test]
fn not_converged_still_fills_report() {
    let sys = build(GjProblem::ConvDiff3d, 6);
    let mut report = GjSolveReport::default();
    let status = unsafe { gj_solve(sys, 1.0, 1e-6, 5, ptr::null_mut(), 0, &mut report) };
    assert_eq!(status, GjStatus::NotConverged);
    assert_eq!(report.iterations, 5);
    assert!(!report.converged);
    unsafe { gj_system_free(sys) };
}

#[test]
fn errors_are_reported() {
    let mut sys = ptr::null_mut();
    assert_eq!(
        unsafe { gj_system_build(GjProblem::Laplace2d, 1, &mut sys) },
        GjStatus::InvalidArgument
    );
    assert!(sys.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { gj_system_build(GjProblem::ConvDiff3d, 4, ptr::null_mut()) },
        GjStatus::NullPointer
    );
    assert!(last_error().contains("null"));

    let sys = build(GjProblem::ConvDiff3d, 4);
    let mut x = vec![0.0; 3];
    let mut report = GjSolveReport::default();
    let status = unsafe { gj_solve(sys, 1.0, 1e-6, 100, x.as_mut_ptr(), x.len(), &mut report) };
    assert_eq!(status, GjStatus::DimensionMismatch);
    let status = unsafe { gj_solve(sys, -1.0, 1e-6, 100, ptr::null_mut(), 0, &mut report) };
    assert_eq!(status, GjStatus::InvalidArgument);
    unsafe { gj_system_free(sys) };
    unsafe { gj_system_free(ptr::null_mut()) };
    assert_eq!(unsafe { gj_system_dim(ptr::null()) }, 0);
}

#[test]
fn spectral_and_grid_weights_agree_on_a_small_problem() {
    let sys = build(GjProblem::ConvDiff3d, 4);
    let mut w_opt = 0.0;
    assert_eq!(unsafe { gj_spectral_omega(sys, &mut w_opt) }, GjStatus::Ok);
    assert!((w_opt - 1.0).abs() < 1e-9);
    let (mut w, mut it) = (0.0, 0usize);
    let status = unsafe { gj_grid_search(sys, 0.9, 1.1, 0.01, 1e-6, 10_000, &mut w, &mut it) };
    assert_eq!(status, GjStatus::Ok);
    assert!((0.9..=1.1).contains(&w) && it > 0);
    unsafe { gj_system_free(sys) };
}

#[test]
fn model_fit_and_predict() {
    let sizes = [5usize, 10, 15, 20, 25];
    let omegas = [1.015, 1.017, 1.005, 1.006, 1.002];
    let mut model = ptr::null_mut();
    let status = unsafe { gj_model_fit(sizes.as_ptr(), omegas.as_ptr(), sizes.len(), GjKernel::Gaussian, 1e-4, &mut model) };
    assert_eq!(status, GjStatus::Ok);
    let (mut mean, mut var) = (0.0, 0.0);
    assert_eq!(unsafe { gj_model_predict(model, 10, &mut mean, &mut var) }, GjStatus::Ok);
    assert!((mean - 1.017).abs() < 0.01);
    assert!(var >= 0.0);
    assert_eq!(unsafe { gj_model_predict(ptr::null(), 10, &mut mean, &mut var) }, GjStatus::NullPointer);
    unsafe { gj_model_free(model) };

    let mut one = ptr::null_mut();
    let status = unsafe { gj_model_fit(sizes.as_ptr(), omegas.as_ptr(), 1, GjKernel::Gaussian, 1e-4, &mut one) };
    assert_eq!(status, GjStatus::InvalidArgument);
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/gpr_jacobi.h")).unwrap();
    for name in [
        "gj_system_build",
        "gj_system_free",
        "gj_solve",
        "gj_grid_search",
        "gj_spectral_omega",
        "gj_model_fit",
        "gj_model_predict",
        "gj_model_free",
        "gj_last_error_message",
        "GJ_STATUS_NOT_CONVERGED",
        "typedef struct GjSystem GjSystem",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Compiles and runs a C client against the generated header and the static
/// library. The library is built into its own target directory because
/// `cargo test` does not produce staticlib artifacts. Skipped without `cc`.
#[test]
fn c_client_links_and_runs() {
    use std::path::PathBuf;
    use std::process::Command;

    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target = manifest.join("../../target/c-client");
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let built = Command::new(cargo)
        .args(["build", "--release", "--offline", "-p", "gpr-jacobi-ffi", "--target-dir"])
        .arg(&target)
        .current_dir(&manifest)
        .status()
        .unwrap();
    assert!(built.success(), "building the static library failed");
    let lib = target.join("release/libgpr_jacobi_ffi.a");

    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C client exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("iterations="));
}
