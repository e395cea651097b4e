//! End-to-end experiment harness: training data, one GP per kernel,
//! predicted weights for the target sizes, and Jacobi versus weighted Jacobi
//! runs, with every artifact written as CSV or plain text.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::config::{format_usize_list, parse_key_values, parse_usize_list, KeyValues};
use crate::error::{Error, Result};
use crate::gpr::{
    normalize_size, optimize_hyperparameters, GprModel, MeanMode, SearchConfig, DEFAULT_JITTER,
};
use crate::kernels::KernelKind;
use crate::problems::{build_problem, ProblemId, ProblemParams};
use crate::solver::{initial_guess, weighted_jacobi_solve, IterationReport, SolverConfig};
use crate::tuning::{
    generate_training_set, read_training_csv, write_training_csv, OmegaGrid, SampleMethod,
    TrainingSample, TRAINING_MAX_ITER,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    pub params: ProblemParams,
    pub training_sizes: Vec<usize>,
    pub target_sizes: Vec<usize>,
    pub kernels: Vec<KernelKind>,
    pub tol: f64,
    pub max_iter: usize,
    /// Cap for each run of the training traversal.
    pub training_max_iter: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_step: f64,
    pub jitter: f64,
    pub mean_mode: MeanMode,
    /// Recorded with the outputs; the pipeline itself draws no random numbers.
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Reuse a stored training set instead of running the traversal.
    pub training_csv: Option<PathBuf>,
    pub workers: usize,
    /// When false, wall-clock columns are written as 0 so reruns are
    /// byte-identical.
    pub record_timings: bool,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemId) -> Self {
        Self {
            problem,
            params: ProblemParams::default(),
            training_sizes: (5..=50).step_by(5).collect(),
            target_sizes: (60..=120).step_by(10).collect(),
            kernels: KernelKind::ALL.to_vec(),
            tol: 1e-6,
            max_iter: 500_000,
            training_max_iter: TRAINING_MAX_ITER,
            omega_min: 0.5,
            omega_max: 2.0,
            omega_step: 0.001,
            jitter: DEFAULT_JITTER,
            mean_mode: MeanMode::default(),
            seed: 0,
            output_dir: PathBuf::from("results"),
            training_csv: None,
            workers: 1,
            record_timings: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.training_sizes.is_empty() || self.target_sizes.is_empty() {
            return bad("training_sizes and target_sizes must be nonempty".into());
        }
        if self.training_sizes.len() < 2 {
            return bad("at least two training sizes are needed to fit a GP".into());
        }
        let min_n = self.problem.min_n();
        if let Some(n) = self
            .training_sizes
            .iter()
            .chain(&self.target_sizes)
            .find(|&&n| n < min_n)
        {
            return bad(format!(
                "size {n} is below the minimum {min_n} for {}",
                self.problem
            ));
        }
        if self.kernels.is_empty() {
            return bad("kernel list is empty".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return bad(format!("jitter must be non-negative, got {}", self.jitter));
        }
        if self.training_max_iter == 0 {
            return bad("training_max_iter must be at least 1".into());
        }
        self.params.validate()?;
        self.solver_config().validate()?;
        self.omega_grid()?;
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            omega: 1.0,
            tol: self.tol,
            max_iter: self.max_iter,
            record_history: true,
        }
    }

    pub fn omega_grid(&self) -> Result<OmegaGrid> {
        OmegaGrid::new(self.omega_min, self.omega_max, self.omega_step)
    }

    /// Applies `key = value` entries on top of the current values.
    pub fn apply(&mut self, kv: &KeyValues) -> Result<()> {
        for (key, (line, value)) in kv {
            let line = *line;
            let wrap = |e: Error| Error::parse(line, format!("{key}: {e}"));
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .map_err(|e| Error::parse(line, format!("bad value for '{key}': {e}")))
            };
            let int = |v: &str| -> Result<usize> {
                v.parse::<usize>()
                    .map_err(|e| Error::parse(line, format!("bad value for '{key}': {e}")))
            };
            match key.as_str() {
                "problem" => self.problem = value.parse().map_err(wrap)?,
                "training_sizes" => self.training_sizes = parse_usize_list(value).map_err(wrap)?,
                "target_sizes" => self.target_sizes = parse_usize_list(value).map_err(wrap)?,
                "kernels" => {
                    self.kernels = value
                        .split(',')
                        .map(|s| KernelKind::from_str(s.trim()))
                        .collect::<Result<_>>()
                        .map_err(wrap)?
                }
                "tol" => self.tol = num(value)?,
                "max_iter" => self.max_iter = int(value)?,
                "training_max_iter" => self.training_max_iter = int(value)?,
                "omega_min" => self.omega_min = num(value)?,
                "omega_max" => self.omega_max = num(value)?,
                "omega_step" => self.omega_step = num(value)?,
                "jitter" => self.jitter = num(value)?,
                "mean_mode" => self.mean_mode = value.parse().map_err(wrap)?,
                "seed" => {
                    self.seed = value
                        .parse()
                        .map_err(|e| Error::parse(line, format!("bad seed: {e}")))?
                }
                "output_dir" => self.output_dir = PathBuf::from(value),
                "training_csv" => self.training_csv = Some(PathBuf::from(value)),
                "workers" => self.workers = int(value)?,
                "record_timings" => {
                    self.record_timings = value
                        .parse()
                        .map_err(|e| Error::parse(line, format!("bad flag: {e}")))?
                }
                "epsilon" => self.params.epsilon = num(value)?,
                "beta" => self.params.beta = num(value)?,
                "domain_length" => self.params.domain_length = num(value)?,
                other => return Err(Error::parse(line, format!("unknown key '{other}'"))),
            }
        }
        Ok(())
    }

    /// Parses a config file; `problem` is required.
    pub fn parse<R: BufRead>(input: R) -> Result<Self> {
        let kv = parse_key_values(input)?;
        let (line, problem) = kv
            .get("problem")
            .ok_or_else(|| Error::parse(1, "missing required key 'problem'"))?;
        let mut cfg = Self::new(
            problem
                .parse()
                .map_err(|e| Error::parse(*line, format!("{e}")))?,
        );
        cfg.apply(&kv)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(BufReader::new(File::open(path)?))?;
        // a relative training_csv is resolved against the file's directory;
        // output_dir stays relative to the working directory
        if let Some(dir) = path.parent() {
            if let Some(t) = &cfg.training_csv {
                if t.is_relative() {
                    cfg.training_csv = Some(dir.join(t));
                }
            }
        }
        Ok(cfg)
    }

    /// Renders the config in the format accepted by [`ExperimentConfig::parse`].
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "problem = {}", self.problem)?;
        writeln!(
            out,
            "training_sizes = {}",
            format_usize_list(&self.training_sizes)
        )?;
        writeln!(
            out,
            "target_sizes = {}",
            format_usize_list(&self.target_sizes)
        )?;
        let kernels: Vec<&str> = self.kernels.iter().map(|k| k.as_str()).collect();
        writeln!(out, "kernels = {}", kernels.join(","))?;
        writeln!(out, "tol = {:e}", self.tol)?;
        writeln!(out, "max_iter = {}", self.max_iter)?;
        writeln!(out, "training_max_iter = {}", self.training_max_iter)?;
        writeln!(out, "omega_min = {}", self.omega_min)?;
        writeln!(out, "omega_max = {}", self.omega_max)?;
        writeln!(out, "omega_step = {}", self.omega_step)?;
        writeln!(out, "jitter = {:e}", self.jitter)?;
        writeln!(out, "mean_mode = {}", self.mean_mode)?;
        writeln!(out, "seed = {}", self.seed)?;
        writeln!(out, "output_dir = {}", self.output_dir.display())?;
        if let Some(t) = &self.training_csv {
            writeln!(out, "training_csv = {}", t.display())?;
        }
        writeln!(out, "workers = {}", self.workers)?;
        writeln!(out, "record_timings = {}", self.record_timings)?;
        writeln!(out, "epsilon = {}", self.params.epsilon)?;
        writeln!(out, "beta = {}", self.params.beta)?;
        writeln!(out, "domain_length = {}", self.params.domain_length)?;
        Ok(())
    }
}

/// One solver run of the benchmark table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    /// `JI` or `WJI+<kernel>`.
    pub method: String,
    pub n: usize,
    /// The iteration count, or the cap when the run did not converge.
    pub iterations: usize,
    pub converged: bool,
    pub wall_seconds: f64,
    pub omega: f64,
    /// GP variance at `n`; absent for plain Jacobi.
    pub predicted_variance: Option<f64>,
}

pub const JI_METHOD: &str = "JI";

pub fn wji_method(kind: KernelKind) -> String {
    format!("WJI+{}", kind.as_str())
}

impl BenchRow {
    pub fn from_report(
        method: String,
        n: usize,
        report: &IterationReport,
        max_iter: usize,
        variance: Option<f64>,
    ) -> Self {
        Self {
            method,
            n,
            iterations: if report.converged {
                report.iterations
            } else {
                max_iter
            },
            converged: report.converged,
            wall_seconds: report.wall_seconds,
            omega: report.omega_used,
            predicted_variance: variance,
        }
    }

    fn cells(&self) -> [String; 7] {
        [
            self.method.clone(),
            self.n.to_string(),
            self.iterations.to_string(),
            self.converged.to_string(),
            format!("{:.6}", self.wall_seconds),
            self.omega.to_string(),
            self.predicted_variance
                .map_or(String::new(), |v| format!("{v:e}")),
        ]
    }
}

pub const BENCH_COLUMNS: [&str; 7] = [
    "method",
    "n",
    "iterations",
    "converged",
    "wall_seconds",
    "omega",
    "predicted_variance",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(Error::InvalidArgument(format!(
                "unknown table format '{other}'"
            ))),
        }
    }
}

pub fn emit_table<W: Write>(rows: &[BenchRow], format: TableFormat, mut out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to emit".into()));
    }
    match format {
        TableFormat::Csv => {
            writeln!(out, "{}", BENCH_COLUMNS.join(","))?;
            for r in rows {
                writeln!(out, "{}", r.cells().join(","))?;
            }
        }
        TableFormat::Markdown => {
            writeln!(out, "| {} |", BENCH_COLUMNS.join(" | "))?;
            writeln!(out, "|{}", "---|".repeat(BENCH_COLUMNS.len()))?;
            for r in rows {
                writeln!(out, "| {} |", r.cells().join(" | "))?;
            }
        }
    }
    Ok(())
}

/// Parses a CSV written by [`emit_table`].
pub fn read_bench_csv<R: BufRead>(input: R) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if idx == 0 {
            if line.trim() != BENCH_COLUMNS.join(",") {
                return Err(Error::parse(1, "unexpected bench header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = |what: &str| Error::parse(idx + 1, format!("bad {what}"));
        if f.len() != BENCH_COLUMNS.len() {
            return Err(bad("field count"));
        }
        rows.push(BenchRow {
            method: f[0].to_string(),
            n: f[1].parse().map_err(|_| bad("n"))?,
            iterations: f[2].parse().map_err(|_| bad("iterations"))?,
            converged: f[3].parse().map_err(|_| bad("converged"))?,
            wall_seconds: f[4].parse().map_err(|_| bad("wall_seconds"))?,
            omega: f[5].parse().map_err(|_| bad("omega"))?,
            predicted_variance: if f[6].is_empty() {
                None
            } else {
                Some(f[6].parse().map_err(|_| bad("predicted_variance"))?)
            },
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairStatus {
    Compared,
    /// Plain Jacobi failed while the weighted run converged.
    JiDiverged,
    WjiDiverged,
    BothDiverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupEntry {
    pub method: String,
    pub n: usize,
    /// `WJI iterations / JI iterations` when both converged.
    pub ratio: Option<f64>,
    pub status: PairStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupSummary {
    pub entries: Vec<SpeedupEntry>,
    /// Geometric mean of the available ratios per weighted method.
    pub geometric_means: Vec<(String, f64)>,
}

pub fn compare_speedup(rows: &[BenchRow]) -> Result<SpeedupSummary> {
    let mut entries = Vec::new();
    for r in rows.iter().filter(|r| r.method != JI_METHOD) {
        let Some(ji) = rows.iter().find(|j| j.method == JI_METHOD && j.n == r.n) else {
            continue;
        };
        let status = match (ji.converged, r.converged) {
            (true, true) => PairStatus::Compared,
            (false, true) => PairStatus::JiDiverged,
            (true, false) => PairStatus::WjiDiverged,
            (false, false) => PairStatus::BothDiverged,
        };
        entries.push(SpeedupEntry {
            method: r.method.clone(),
            n: r.n,
            ratio: (status == PairStatus::Compared)
                .then(|| r.iterations as f64 / ji.iterations as f64),
            status,
        });
    }
    let mut methods: Vec<String> = Vec::new();
    for e in &entries {
        if !methods.contains(&e.method) {
            methods.push(e.method.clone());
        }
    }
    let geometric_means: Vec<(String, f64)> = methods
        .into_iter()
        .filter_map(|m| {
            let logs: Vec<f64> = entries
                .iter()
                .filter(|e| e.method == m)
                .filter_map(|e| e.ratio)
                .map(f64::ln)
                .collect();
            (!logs.is_empty()).then(|| (m, (logs.iter().sum::<f64>() / logs.len() as f64).exp()))
        })
        .collect();
    if geometric_means.is_empty() {
        return Err(Error::InvalidArgument(
            "no comparable (JI, WJI) pairs".into(),
        ));
    }
    Ok(SpeedupSummary {
        entries,
        geometric_means,
    })
}

/// GP prediction of ω at one target size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaPrediction {
    pub n: usize,
    pub kernel: KernelKind,
    pub omega: f64,
    pub variance: f64,
}

pub fn write_predictions_csv<W: Write>(preds: &[OmegaPrediction], mut out: W) -> Result<()> {
    writeln!(out, "n,kernel,omega_pred,variance")?;
    for p in preds {
        writeln!(
            out,
            "{},{},{},{:e}",
            p.n,
            p.kernel.as_str(),
            p.omega,
            p.variance
        )?;
    }
    Ok(())
}

/// Fits one GP per kernel to the training pairs, with hyperparameters chosen
/// by [`optimize_hyperparameters`].
pub fn train_models(
    samples: &[TrainingSample],
    kernels: &[KernelKind],
    jitter: f64,
    mean_mode: MeanMode,
) -> Result<Vec<(KernelKind, GprModel)>> {
    let inputs: Vec<Vec<f64>> = samples.iter().map(|s| normalize_size(s.n)).collect();
    let targets: Vec<f64> = samples.iter().map(|s| s.omega_star).collect();
    kernels
        .iter()
        .map(|&kind| {
            let spec = optimize_hyperparameters(
                &inputs,
                &targets,
                kind,
                jitter,
                mean_mode,
                &SearchConfig::default(),
            )?;
            log::info!("{kind} kernel hyperparameters: {spec:?}");
            Ok((
                kind,
                GprModel::fit(&inputs, &targets, spec, jitter, 0.0, mean_mode)?,
            ))
        })
        .collect()
}

pub fn predict_omegas(
    models: &[(KernelKind, GprModel)],
    sizes: &[usize],
) -> Result<Vec<OmegaPrediction>> {
    let mut out = Vec::new();
    for &(kernel, ref model) in models {
        for &n in sizes {
            let p = model.predict(&normalize_size(n))?;
            out.push(OmegaPrediction {
                n,
                kernel,
                omega: p.mean,
                variance: p.variance,
            });
        }
    }
    Ok(out)
}

/// Writes `iter,rres` with 17 significant digits; row 0 is the start.
pub fn write_history_csv<W: Write>(history: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "iter,rres")?;
    writeln!(out, "0,{:.16e}", 1.0)?;
    for (k, r) in history.iter().enumerate() {
        writeln!(out, "{},{:.16e}", k + 1, r)?;
    }
    Ok(())
}

/// Seconds spent in each pipeline phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseTimings {
    pub training_generation: f64,
    pub model_fitting: f64,
    pub prediction: f64,
    pub solving: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub training: Vec<TrainingSample>,
    pub predictions: Vec<OmegaPrediction>,
    pub rows: Vec<BenchRow>,
    pub timings: PhaseTimings,
    pub files: Vec<PathBuf>,
}

/// Tracks created files so a failed run leaves nothing half-written behind.
struct Artifacts {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn create(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> Result<()>,
    ) -> Result<()> {
        let path = self.dir.join(name);
        self.files.push(path.clone());
        let mut w = BufWriter::new(File::create(&path)?);
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }

    fn remove_all(&self) {
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
    }
}

struct Job {
    method: String,
    n: usize,
    omega: f64,
    variance: Option<f64>,
    history_name: String,
}

/// Runs `jobs` on up to `workers` threads; results keep the job order.
fn run_jobs(cfg: &ExperimentConfig, jobs: &[Job]) -> Result<Vec<(BenchRow, Vec<f64>)>> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<(BenchRow, Vec<f64>)>>>> =
        Mutex::new(jobs.iter().map(|_| None).collect());
    let worker = || loop {
        let k = next.fetch_add(1, Ordering::SeqCst);
        let Some(job) = jobs.get(k) else { break };
        let outcome = (|| {
            let sys = build_problem(cfg.problem, job.n, &cfg.params)?;
            let x0 = initial_guess(&sys)?.x0;
            let solver = cfg.solver_config().with_omega(job.omega);
            let (report, _) = weighted_jacobi_solve(&sys, &solver, &x0)?;
            log::info!(
                "{} n={} omega={} iterations={} converged={}",
                job.method,
                job.n,
                job.omega,
                report.iterations,
                report.converged
            );
            let mut row = BenchRow::from_report(
                job.method.clone(),
                job.n,
                &report,
                cfg.max_iter,
                job.variance,
            );
            if !cfg.record_timings {
                row.wall_seconds = 0.0;
            }
            Ok((row, report.rres_history.unwrap_or_default()))
        })();
        results.lock().expect("result lock")[k] = Some(outcome);
    };
    std::thread::scope(|s| {
        for _ in 0..cfg.workers.min(jobs.len()).max(1) {
            s.spawn(worker);
        }
    });
    results
        .into_inner()
        .expect("result lock")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

/// Runs the full pipeline and writes its artifacts to `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let mut artifacts = Artifacts {
        dir: cfg.output_dir.clone(),
        files: Vec::new(),
    };
    match run_pipeline(cfg, &mut artifacts) {
        Ok(mut out) => {
            out.files = artifacts.files;
            Ok(out)
        }
        Err(e) => {
            artifacts.remove_all();
            Err(e)
        }
    }
}

fn timed(record: bool, start: Instant) -> f64 {
    if record {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    }
}

fn run_pipeline(cfg: &ExperimentConfig, artifacts: &mut Artifacts) -> Result<ExperimentOutput> {
    let mut timings = PhaseTimings::default();

    let start = Instant::now();
    let training = match &cfg.training_csv {
        Some(path) => {
            let samples = read_training_csv(BufReader::new(File::open(path)?))?;
            samples
                .into_iter()
                .filter(|s| cfg.training_sizes.contains(&s.n))
                .collect::<Vec<_>>()
        }
        None => generate_training_set(
            cfg.problem,
            &cfg.training_sizes,
            &cfg.params,
            &cfg.omega_grid()?,
            &SolverConfig {
                tol: cfg.tol,
                max_iter: cfg.training_max_iter,
                ..SolverConfig::default()
            },
            SampleMethod::GridTraversal,
        )?,
    };
    if training.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "only {} training samples match the configured sizes",
            training.len()
        )));
    }
    timings.training_generation = timed(cfg.record_timings, start);
    artifacts.create("config.txt", |w| cfg.write(w))?;
    artifacts.create("training.csv", |w| write_training_csv(&training, w))?;

    let start = Instant::now();
    let models = train_models(&training, &cfg.kernels, cfg.jitter, cfg.mean_mode)?;
    timings.model_fitting = timed(cfg.record_timings, start);
    for (kind, model) in &models {
        artifacts.create(&format!("model_{}.txt", kind.as_str()), |w| model.write(w))?;
    }

    let start = Instant::now();
    let predictions = predict_omegas(&models, &cfg.target_sizes)?;
    timings.prediction = timed(cfg.record_timings, start);
    artifacts.create("predictions.csv", |w| {
        write_predictions_csv(&predictions, w)
    })?;

    let mut jobs = Vec::new();
    for &n in &cfg.target_sizes {
        jobs.push(Job {
            method: JI_METHOD.to_string(),
            n,
            omega: 1.0,
            variance: None,
            history_name: format!("history_JI_n{n}.csv"),
        });
        for p in predictions.iter().filter(|p| p.n == n) {
            jobs.push(Job {
                method: wji_method(p.kernel),
                n,
                omega: p.omega,
                variance: Some(p.variance),
                history_name: format!("history_WJI_{}_n{n}.csv", p.kernel.as_str()),
            });
        }
    }
    let start = Instant::now();
    let results = run_jobs(cfg, &jobs)?;
    timings.solving = timed(cfg.record_timings, start);
    let mut rows = Vec::with_capacity(results.len());
    for (job, (row, history)) in jobs.iter().zip(results) {
        artifacts.create(&job.history_name, |w| write_history_csv(&history, w))?;
        rows.push(row);
    }
    artifacts.create("bench.csv", |w| emit_table(&rows, TableFormat::Csv, w))?;
    artifacts.create("bench.md", |w| emit_table(&rows, TableFormat::Markdown, w))?;
    artifacts.create("phases.csv", |w| {
        writeln!(w, "phase,seconds")?;
        writeln!(w, "training_generation,{:.6}", timings.training_generation)?;
        writeln!(w, "model_fitting,{:.6}", timings.model_fitting)?;
        writeln!(w, "prediction,{:.6}", timings.prediction)?;
        writeln!(w, "solving,{:.6}", timings.solving)?;
        Ok(())
    })?;

    Ok(ExperimentOutput {
        training,
        predictions,
        rows,
        timings,
        files: Vec::new(),
    })
}
