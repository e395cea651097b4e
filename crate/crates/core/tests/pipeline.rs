use std::fs;
use std::io::Cursor;
use std::path::Path;

use gpr_jacobi::bench::{compare_speedup, read_bench_csv, run_experiment, ExperimentConfig, JI_METHOD};
use gpr_jacobi::problems::{build_problem, ProblemId};
use gpr_jacobi::tuning::jacobi_eigenvalues;

fn small_config(dir: &Path) -> ExperimentConfig {
    let text = format!(
        "problem = convdiff3d\n\
         training_sizes = 4:8:1\n\
         target_sizes = 10,12\n\
         omega_min = 0.9\n\
         omega_max = 1.0\n\
         omega_step = 0.005\n\
         training_max_iter = 20000\n\
         max_iter = 20000\n\
         record_timings = false\n\
         workers = 2\n\
         output_dir = {}\n",
        dir.display()
    );
    ExperimentConfig::parse(Cursor::new(text)).unwrap()
}

fn read_all_csv(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv" || e == "txt" || e == "md"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn pipeline_is_deterministic_and_complete() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let out = run_experiment(&small_config(a.path())).unwrap();
    run_experiment(&small_config(b.path())).unwrap();

    // three kernels plus JI at two sizes
    assert_eq!(out.rows.len(), 8);
    assert_eq!(out.training.len(), 5);
    for name in ["training.csv", "predictions.csv", "bench.csv", "bench.md", "model_gaussian.txt", "history_JI_n12.csv"] {
        assert!(a.path().join(name).exists(), "missing {name}");
    }

    let (fa, fb) = (read_all_csv(a.path()), read_all_csv(b.path()));
    assert_eq!(fa.len(), fb.len());
    for ((na, ca), (nb, cb)) in fa.iter().zip(&fb) {
        assert_eq!(na, nb);
        if na == "config.txt" {
            continue; // records the output directory
        }
        assert!(ca == cb, "{na} differs between identical runs");
    }

    let preds = fs::read_to_string(a.path().join("predictions.csv")).unwrap();
    assert!(preds.starts_with("n,kernel,omega_pred,variance\n"));
    for line in preds.lines().skip(1) {
        let v: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(v >= 0.0, "negative variance in '{line}'");
    }

    let rows = read_bench_csv(Cursor::new(fs::read(a.path().join("bench.csv")).unwrap())).unwrap();
    assert_eq!(rows, out.rows);
    for r in &rows {
        if r.method == JI_METHOD {
            assert!(r.predicted_variance.is_none());
        } else {
            assert!(r.predicted_variance.unwrap() >= 0.0);
        }
    }
    compare_speedup(&rows).unwrap();
}

#[test]
fn converged_weighted_rows_have_contracting_iteration_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_experiment(&small_config(dir.path())).unwrap();
    for r in out.rows.iter().filter(|r| r.method != JI_METHOD && r.converged) {
        let sys = build_problem(ProblemId::ConvDiff3d, r.n, &Default::default()).unwrap();
        let eig = jacobi_eigenvalues(&sys).unwrap();
        let rho = eig.iter().map(|l| (1.0 - r.omega * l).abs()).fold(0.0, f64::max);
        assert!(rho < 1.0, "{} n={} omega={} rho={rho}", r.method, r.n, r.omega);
    }
}

#[test]
fn failed_run_leaves_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    let fixture = dir.path().join("fixture.in");
    fs::write(&fixture, "n,omega_star,iterations,method\n4,1.0,10,grid\n6,0.98,30,grid\n").unwrap();
    cfg.training_csv = Some(fixture.clone());
    cfg.training_sizes = vec![4, 6];
    // a directory in the way makes the predictions file fail after the
    // config, training and model files were already written
    let blocker = dir.path().join("predictions.csv");
    fs::create_dir(&blocker).unwrap();
    assert!(run_experiment(&cfg).is_err());
    let mut left: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    left.sort();
    assert_eq!(left, vec![fixture, blocker]);
}

#[test]
fn stored_training_set_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = dir.path().join("stored.in");
    fs::write(
        &fixture,
        "n,omega_star,iterations,method\n5,1.015,88,grid\n10,1.017,287,grid\n15,1.005,592,grid\n20,1.006,988,grid\n",
    )
    .unwrap();
    let mut cfg = small_config(&dir.path().join("out"));
    cfg.training_csv = Some(fixture);
    cfg.training_sizes = vec![5, 10, 15, 20];
    cfg.target_sizes = vec![6];
    cfg.kernels = vec![gpr_jacobi::kernels::KernelKind::Gaussian];
    let out = run_experiment(&cfg).unwrap();
    assert_eq!(out.training.len(), 4);
    assert_eq!(out.training[1].omega_star, 1.017);
    assert_eq!(out.rows.len(), 2);
}

#[test]
fn training_fixture_matches_regenerated_rows() {
    use gpr_jacobi::tuning::{grid_search_omega, read_training_csv, training_solver_config, OmegaGrid};
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/convdiff3d_training.csv");
    let stored = read_training_csv(std::io::BufReader::new(fs::File::open(path).unwrap())).unwrap();
    let sizes: Vec<usize> = stored.iter().map(|s| s.n).collect();
    assert_eq!(sizes, (5..=50).step_by(5).collect::<Vec<_>>());
    for row in stored.iter().filter(|s| s.n <= 10) {
        let sys = build_problem(ProblemId::ConvDiff3d, row.n, &Default::default()).unwrap();
        let fresh = grid_search_omega(&sys, &OmegaGrid::default(), &training_solver_config()).unwrap();
        assert_eq!(&fresh, row);
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::from_path(&path).unwrap();
        cfg.validate().unwrap();
        if let Some(t) = &cfg.training_csv {
            assert!(t.exists(), "{} points at missing {}", path.display(), t.display());
        }
        seen += 1;
    }
    assert!(seen >= 3);
}
