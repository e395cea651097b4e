use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gpr_jacobi::bench::{
    compare_speedup, emit_table, predict_omegas, run_experiment, train_models, write_history_csv,
    write_predictions_csv, ExperimentConfig, TableFormat,
};
use gpr_jacobi::bounds::{
    convergence_sweep, run_decomposition_suite, run_pointwise_suite, write_convergence_csv,
    write_decomposition_csv, write_pointwise_csv,
};
use gpr_jacobi::config::parse_usize_list;
use gpr_jacobi::gpr::{normalize_size, GprModel, MeanMode, DEFAULT_JITTER};
use gpr_jacobi::kernels::KernelKind;
use gpr_jacobi::linalg::write_matrix_market;
use gpr_jacobi::problems::{build_problem, write_metadata, write_vector, ProblemId, ProblemParams};
use gpr_jacobi::solver::{initial_guess, solution_error, weighted_jacobi_solve, SolverConfig};
use gpr_jacobi::tuning::{
    generate_training_set, omega_opt_spectral, read_training_csv, spectrum_of_jacobi_operator,
    write_training_csv, OmegaGrid, SampleMethod, TRAINING_MAX_ITER,
};
use gpr_jacobi::{Error, Result};

#[derive(Parser)]
#[command(
    name = "gpr-jacobi",
    version,
    about = "Predict the weighted Jacobi relaxation weight with GP regression"
)]
struct Cli {
    /// Experiment config file (`key = value`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parallel solves in `benchmark`.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the best grid ω for each training size.
    GenerateTraining {
        #[arg(long)]
        problem: Option<ProblemId>,
        /// `a:b:step` or a comma list.
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long, value_enum, default_value_t = Method::Grid)]
        method: Method,
    },
    /// Fit a GP to a training CSV and write the model file.
    Train {
        #[arg(long)]
        training: PathBuf,
        #[arg(long, default_value = "gaussian")]
        kernel: KernelKind,
        #[arg(long, default_value_t = DEFAULT_JITTER)]
        jitter: f64,
        #[arg(long, default_value = "constant")]
        mean_mode: MeanMode,
    },
    /// Predict ω and its variance for target sizes.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "60:120:10")]
        sizes: String,
    },
    /// Run Jacobi or weighted Jacobi on one problem.
    Solve {
        #[arg(long)]
        problem: ProblemId,
        #[arg(long)]
        n: usize,
        /// A number, or `auto` (GP prediction with --model, else the spectral optimum).
        #[arg(long, default_value = "1")]
        omega: String,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 500_000)]
        max_iter: usize,
        /// Write the `iter,rres` history here.
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Run the full experiment described by --config.
    Benchmark {
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
    },
    /// Numerical checks of the error bounds and the convergence condition.
    VerifyBounds {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 500)]
        instances: usize,
        /// CSV with one line per instance or grid point.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Use noisy observations (pointwise suite).
        #[arg(long)]
        noisy: bool,
        /// Grid size for the convergence sweep.
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value = "convdiff3d")]
        problem: ProblemId,
    },
    /// Write a problem as Matrix Market plus right-hand side and metadata.
    Export {
        #[arg(long)]
        problem: ProblemId,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Grid,
    Spectral,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Decomposition,
    Pointwise,
    Convergence,
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn load_config(cli: &Cli) -> Result<Option<ExperimentConfig>> {
    let Some(path) = &cli.config else {
        return Ok(None);
    };
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(Some(cfg))
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenerateTraining {
            problem,
            sizes,
            method,
        } => {
            let base = load_config(cli)?;
            let problem = problem
                .or(base.as_ref().map(|c| c.problem))
                .ok_or_else(|| {
                    Error::InvalidArgument("--problem or --config is required".into())
                })?;
            let mut cfg = base.unwrap_or_else(|| ExperimentConfig::new(problem));
            cfg.problem = problem;
            if let Some(s) = sizes {
                cfg.training_sizes = parse_usize_list(s)?;
            }
            let method = match method {
                Method::Grid => SampleMethod::GridTraversal,
                Method::Spectral => SampleMethod::Spectral,
            };
            let solver = SolverConfig {
                tol: cfg.tol,
                max_iter: if matches!(method, SampleMethod::GridTraversal) {
                    cfg.training_max_iter
                } else {
                    TRAINING_MAX_ITER.max(cfg.max_iter)
                },
                ..SolverConfig::default()
            };
            let samples = generate_training_set(
                problem,
                &cfg.training_sizes,
                &cfg.params,
                &cfg.omega_grid()?,
                &solver,
                method,
            )?;
            let path = out_dir(cli)?.join("training.csv");
            write_training_csv(&samples, create(&path)?)?;
            write_training_csv(&samples, io::stdout().lock())?;
        }
        Command::Train {
            training,
            kernel,
            jitter,
            mean_mode,
        } => {
            let samples = read_training_csv(BufReader::new(File::open(training)?))?;
            let models = train_models(&samples, &[*kernel], *jitter, *mean_mode)?;
            let (_, model) = &models[0];
            let path = out_dir(cli)?.join(format!("model_{}.txt", kernel.as_str()));
            let mut w = create(&path)?;
            model.write(&mut w)?;
            w.flush()?;
            println!(
                "wrote {} (log marginal likelihood {:.6})",
                path.display(),
                model.log_marginal_likelihood()
            );
        }
        Command::Predict { model, sizes } => {
            let m = GprModel::read(BufReader::new(File::open(model)?))?;
            let kind = m.kernel().kind;
            let preds = predict_omegas(&[(kind, m)], &parse_usize_list(sizes)?)?;
            if cli.out.is_some() {
                write_predictions_csv(&preds, create(&out_dir(cli)?.join("predictions.csv"))?)?;
            }
            write_predictions_csv(&preds, io::stdout().lock())?;
        }
        Command::Solve {
            problem,
            n,
            omega,
            model,
            tol,
            max_iter,
            history,
        } => {
            let params = load_config(cli)?.map_or_else(ProblemParams::default, |c| c.params);
            let sys = build_problem(*problem, *n, &params)?;
            let omega = match (omega.as_str(), model) {
                ("auto", Some(path)) => {
                    let m = GprModel::read(BufReader::new(File::open(path)?))?;
                    m.predict(&normalize_size(*n))?.mean
                }
                ("auto", None) => omega_opt_spectral(&spectrum_of_jacobi_operator(&sys)?)?,
                (text, _) => text
                    .parse()
                    .map_err(|e| Error::InvalidArgument(format!("bad --omega '{text}': {e}")))?,
            };
            let cfg = SolverConfig {
                omega,
                tol: *tol,
                max_iter: *max_iter,
                record_history: history.is_some(),
            };
            let guess = initial_guess(&sys)?;
            let (report, x) = weighted_jacobi_solve(&sys, &cfg, &guess.x0)?;
            if let Some(path) = history {
                write_history_csv(report.rres_history.as_deref().unwrap_or(&[]), create(path)?)?;
            }
            println!(
                "problem={} n={} omega={} iterations={} converged={} termination={:?} rres={:e} seconds={:.3}",
                problem, n, omega, report.iterations, report.converged, report.termination, report.final_rres,
                report.wall_seconds
            );
            if let Some(err) = solution_error(&sys, &x) {
                println!("error_vs_exact={err:e}");
            }
            if !report.converged {
                return Err(Error::NotConverged(format!(
                    "{:?} after {} iterations",
                    report.termination, report.iterations
                )));
            }
        }
        Command::Benchmark { format } => {
            let cfg = load_config(cli)?
                .ok_or_else(|| Error::InvalidArgument("benchmark needs --config".into()))?;
            let out = run_experiment(&cfg)?;
            let fmt = match format {
                Format::Csv => TableFormat::Csv,
                Format::Markdown => TableFormat::Markdown,
            };
            emit_table(&out.rows, fmt, io::stdout().lock())?;
            match compare_speedup(&out.rows) {
                Ok(s) => {
                    for (m, g) in &s.geometric_means {
                        println!("{m}: geometric mean iteration ratio vs JI = {g:.4}");
                    }
                }
                Err(e) => println!("no speedup summary: {e}"),
            }
            println!("artifacts in {}", cfg.output_dir.display());
        }
        Command::VerifyBounds {
            suite,
            instances,
            report,
            noisy,
            n,
            problem,
        } => {
            let seed = cli.seed.unwrap_or(0);
            let failed = match suite {
                Suite::Pointwise => {
                    let vars: &[f64] = if *noisy { &[1e-4, 1e-2] } else { &[] };
                    let s = run_pointwise_suite(*instances, seed, vars)?;
                    println!(
                        "instances={} violations={} max_ratio={:.6}",
                        s.records.len(),
                        s.violations,
                        s.max_ratio
                    );
                    if let Some(p) = report {
                        write_pointwise_csv(&s, create(p)?)?;
                    }
                    s.violations > 0
                }
                Suite::Decomposition => {
                    let recs = run_decomposition_suite(*instances, seed)?;
                    let worst = recs.iter().map(|r| r.scaled_residual()).fold(0.0, f64::max);
                    println!("instances={} max_scaled_residual={worst:e}", recs.len());
                    if let Some(p) = report {
                        write_decomposition_csv(&recs, create(p)?)?;
                    }
                    worst > 1e-10
                }
                Suite::Convergence => {
                    let sys = build_problem(*problem, *n, &ProblemParams::default())?;
                    let sweep = convergence_sweep(&sys, &OmegaGrid::default())?;
                    println!(
                        "grid_points={} violations={} necessity_counterexamples={} bound_failures={} rho_opt_error={:e}",
                        sweep.checks.len(),
                        sweep.violations,
                        sweep.necessity_counterexamples,
                        sweep.bound_failures,
                        sweep.rho_opt_error
                    );
                    if let Some(p) = report {
                        write_convergence_csv(&sweep, create(p)?)?;
                    }
                    sweep.violations > 0 || sweep.bound_failures > 0
                }
            };
            if failed {
                return Err(Error::CheckFailed("bound check reported violations".into()));
            }
        }
        Command::Export { problem, n } => {
            let params = load_config(cli)?.map_or_else(ProblemParams::default, |c| c.params);
            let sys = build_problem(*problem, *n, &params)?;
            let dir = out_dir(cli)?;
            let stem = format!("{}_n{}", problem, n);
            write_matrix_market(sys.matrix(), create(&dir.join(format!("{stem}.mtx")))?)?;
            write_vector(sys.rhs(), create(&dir.join(format!("{stem}_rhs.txt")))?)?;
            write_metadata(&sys, create(&dir.join(format!("{stem}.meta")))?)?;
            if let Some(x) = &sys.x_exact {
                write_vector(x, create(&dir.join(format!("{stem}_exact.txt")))?)?;
            }
            println!("wrote {stem}.* to {}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage_error() { 1 } else { 2 })
        }
    }
}
