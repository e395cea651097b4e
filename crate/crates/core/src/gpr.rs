//! Gaussian process regression.
//!
//! With `K_r = K_XX + r I`, `r = jitter + noise_var`, and `L` its Cholesky
//! factor, the predictive mean and variance at `z` are
//!
//! ```text
//! mean(z) = m + k_zᵀ α,          α = K_r⁻¹ (Y − m)
//! var(z)  = κ(z, z) − ‖L⁻¹ k_z‖²
//! ```
//!
//! where `m` is zero or the sample mean of `Y`. Hyperparameters are chosen by
//! maximizing the log marginal likelihood over a fixed log-spaced grid, then
//! refined by a Nelder–Mead simplex in log-parameter space.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::config::{parse_f64_list, parse_key_values, KeyValues};
use crate::error::{Error, Result};
use crate::kernels::{cross_kernel_vector, distance, kernel_matrix, KernelKind, KernelSpec};

/// Default diagonal regularization `η`.
pub const DEFAULT_JITTER: f64 = 1e-4;

/// Grid sizes are divided by this before entering the kernel.
pub const INPUT_SCALE: f64 = 50.0;

/// Kernel input for grid size `n`.
pub fn normalize_size(n: usize) -> Vec<f64> {
    vec![n as f64 / INPUT_SCALE]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanMode {
    Zero,
    /// Subtract the sample mean of the targets before fitting.
    #[default]
    ConstantEmpirical,
}

impl MeanMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MeanMode::Zero => "zero",
            MeanMode::ConstantEmpirical => "constant",
        }
    }
}

impl fmt::Display for MeanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zero" => Ok(MeanMode::Zero),
            "constant" | "empirical" => Ok(MeanMode::ConstantEmpirical),
            other => Err(Error::InvalidArgument(format!(
                "unknown mean mode '{other}' (expected zero or constant)"
            ))),
        }
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
///
/// On failure the error carries the first non-positive pivot.
pub fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix",
            n,
            a.ncols()
        )));
    }
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut s = a[(j, j)];
        for k in 0..j {
            s -= l[(j, k)] * l[(j, k)];
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: s });
        }
        let ljj = s.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut t = a[(i, j)];
            for k in 0..j {
                t -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = t / ljj;
        }
    }
    Ok(l)
}

/// Solves `L y = b` for lower-triangular `L`.
pub fn forward_substitute(l: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Solves `Lᵀ x = y` for lower-triangular `L`.
pub fn backward_substitute(l: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

/// A fitted regressor. Immutable once built.
#[derive(Debug, Clone)]
pub struct GprModel {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    kernel: KernelSpec,
    jitter: f64,
    noise_var: f64,
    mean_mode: MeanMode,
    mean_offset: f64,
    chol: DMatrix<f64>,
    alpha: Vec<f64>,
}

impl GprModel {
    pub fn fit(
        inputs: &[Vec<f64>],
        targets: &[f64],
        kernel: KernelSpec,
        jitter: f64,
        noise_var: f64,
        mean_mode: MeanMode,
    ) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} inputs and {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if !(jitter >= 0.0 && noise_var >= 0.0 && (jitter + noise_var).is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "jitter ({jitter}) and noise variance ({noise_var}) must be non-negative"
            )));
        }
        if targets.iter().any(|y| !y.is_finite()) {
            return Err(Error::NonFinite("training targets".into()));
        }
        kernel.validate()?;
        let dim = inputs[0].len();
        if inputs.iter().any(|x| x.len() != dim) {
            return Err(Error::DimensionMismatch(
                "training inputs of mixed dimension".into(),
            ));
        }

        let mut k = kernel_matrix(&kernel, inputs)?.values;
        let reg = jitter + noise_var;
        for i in 0..k.nrows() {
            k[(i, i)] += reg;
        }
        let chol = cholesky(&k)?;
        let mean_offset = match mean_mode {
            MeanMode::Zero => 0.0,
            MeanMode::ConstantEmpirical => targets.iter().sum::<f64>() / targets.len() as f64,
        };
        let centered: Vec<f64> = targets.iter().map(|y| y - mean_offset).collect();
        let alpha = backward_substitute(&chol, &forward_substitute(&chol, &centered));
        Ok(Self {
            inputs: inputs.to_vec(),
            targets: targets.to_vec(),
            kernel,
            jitter,
            noise_var,
            mean_mode,
            mean_offset,
            chol,
            alpha,
        })
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn mean_mode(&self) -> MeanMode {
        self.mean_mode
    }

    pub fn mean_offset(&self) -> f64 {
        self.mean_offset
    }

    /// Lower Cholesky factor of the regularized Gram matrix.
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Mean and variance before the variance is clamped at zero.
    pub fn predict_unclamped(&self, z: &[f64]) -> Result<Prediction> {
        if z.len() != self.inputs[0].len() {
            return Err(Error::DimensionMismatch(format!(
                "query of dimension {} for a model trained on dimension {}",
                z.len(),
                self.inputs[0].len()
            )));
        }
        let kz = cross_kernel_vector(&self.kernel, &self.inputs, z)?;
        let mean = self.mean_offset + kz.iter().zip(&self.alpha).map(|(a, b)| a * b).sum::<f64>();
        let v = forward_substitute(&self.chol, &kz);
        let variance = self.kernel.variance() - v.iter().map(|t| t * t).sum::<f64>();
        Ok(Prediction { mean, variance })
    }

    pub fn predict(&self, z: &[f64]) -> Result<Prediction> {
        let p = self.predict_unclamped(z)?;
        Ok(Prediction {
            mean: p.mean,
            variance: p.variance.max(0.0),
        })
    }

    /// Convenience for one-dimensional inputs.
    pub fn predict_scalar(&self, z: f64) -> Result<Prediction> {
        self.predict(&[z])
    }

    /// `−½ yᵀα − Σ ln L_ii − (N/2) ln 2π` with `y` the (centered) targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.targets.len();
        let fit: f64 = self
            .targets
            .iter()
            .zip(&self.alpha)
            .map(|(y, a)| (y - self.mean_offset) * a)
            .sum();
        let log_det_half: f64 = (0..n).map(|i| self.chol[(i, i)].ln()).sum();
        -0.5 * fit - log_det_half - 0.5 * n as f64 * (2.0 * PI).ln()
    }

    /// Writes the model as `key = value` lines. Loading refits from the stored
    /// data, which reproduces predictions bit for bit.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let k = &self.kernel;
        writeln!(out, "# Gaussian process regression model")?;
        writeln!(out, "format = gpr-model-1")?;
        writeln!(out, "kernel = {}", k.kind)?;
        writeln!(out, "sigma_f = {:e}", k.sigma_f)?;
        writeln!(out, "sigma_l = {:e}", k.sigma_l)?;
        writeln!(out, "period = {:e}", k.period)?;
        if let (Some(f2), Some(l2)) = (k.sigma_f2, k.sigma_l2) {
            writeln!(out, "sigma_f2 = {f2:e}")?;
            writeln!(out, "sigma_l2 = {l2:e}")?;
        }
        writeln!(out, "jitter = {:e}", self.jitter)?;
        writeln!(out, "noise_var = {:e}", self.noise_var)?;
        writeln!(out, "mean_mode = {}", self.mean_mode)?;
        let points: Vec<String> = self
            .inputs
            .iter()
            .map(|x| {
                x.iter()
                    .map(|v| format!("{v:e}"))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        writeln!(out, "inputs = {}", points.join(";"))?;
        let ys: Vec<String> = self.targets.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "targets = {}", ys.join(","))?;
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let kv = parse_key_values(input)?;
        let get = |key: &str| -> Result<&(usize, String)> {
            kv.get(key)
                .ok_or_else(|| Error::InvalidArgument(format!("model file lacks '{key}'")))
        };
        let num = |key: &str| -> Result<f64> { parse_number(&kv, key) };
        let (line, format) = get("format")?;
        if format != "gpr-model-1" {
            return Err(Error::parse(
                *line,
                format!("unsupported model format '{format}'"),
            ));
        }
        let kind: KernelKind = get("kernel")?.1.parse()?;
        let mut kernel = KernelSpec {
            kind,
            sigma_f: num("sigma_f")?,
            sigma_l: num("sigma_l")?,
            period: num("period")?,
            sigma_f2: None,
            sigma_l2: None,
        };
        if kv.contains_key("sigma_f2") || kv.contains_key("sigma_l2") {
            kernel.sigma_f2 = Some(num("sigma_f2")?);
            kernel.sigma_l2 = Some(num("sigma_l2")?);
        }
        let inputs = get("inputs")?
            .1
            .split(';')
            .map(parse_f64_list)
            .collect::<Result<Vec<_>>>()?;
        let targets = parse_f64_list(&get("targets")?.1)?;
        Self::fit(
            &inputs,
            &targets,
            kernel,
            num("jitter")?,
            num("noise_var")?,
            get("mean_mode")?.1.parse()?,
        )
    }
}

fn parse_number(kv: &KeyValues, key: &str) -> Result<f64> {
    let (line, text) = kv
        .get(key)
        .ok_or_else(|| Error::InvalidArgument(format!("missing '{key}'")))?;
    text.parse::<f64>()
        .map_err(|e| Error::parse(*line, format!("bad value for '{key}': {e}")))
}

/// Search ranges and budgets for [`optimize_hyperparameters`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Bounds of the `σ_f` and `σ_l` grids.
    pub scale_min: f64,
    pub scale_max: f64,
    pub points_per_decade: usize,
    /// Period grid spans `[period_min_factor, period_max_factor]` times the
    /// input range.
    pub period_min_factor: f64,
    pub period_max_factor: f64,
    pub period_points: usize,
    /// Nelder–Mead budget and relative tolerance.
    pub max_evals: usize,
    pub rel_tol: f64,
    pub noise_var: f64,
    /// Tie the additive kernel's periodic amplitude and length scale to the
    /// Gaussian ones.
    pub shared_additive: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            scale_min: 1e-2,
            scale_max: 1e2,
            points_per_decade: 9,
            period_min_factor: 0.1,
            period_max_factor: 4.0,
            period_points: 16,
            max_evals: 200,
            rel_tol: 1e-6,
            noise_var: 0.0,
            shared_additive: false,
        }
    }
}

impl SearchConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.scale_min > 0.0
            && self.scale_max > self.scale_min
            && self.points_per_decade >= 1
            && self.period_min_factor > 0.0
            && self.period_max_factor > self.period_min_factor
            && self.period_points >= 2
            && self.rel_tol > 0.0
            && self.noise_var >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid search configuration {self:?}"
            )))
        }
    }

    /// Log-spaced `σ` grid from `scale_min` to `scale_max`.
    pub fn scale_grid(&self) -> Vec<f64> {
        let decades = (self.scale_max / self.scale_min).log10();
        let steps = (decades * self.points_per_decade as f64).round() as usize;
        (0..=steps)
            .map(|k| {
                let v = self.scale_min * 10f64.powf(k as f64 / self.points_per_decade as f64);
                v.min(self.scale_max)
            })
            .collect()
    }

    /// Log-spaced period grid for inputs spanning `range`.
    pub fn period_grid(&self, range: f64) -> Vec<f64> {
        let (lo, hi) = self.period_bounds(range);
        let m = self.period_points - 1;
        (0..=m)
            .map(|j| {
                if j == m {
                    hi
                } else {
                    lo * (hi / lo).powf(j as f64 / m as f64)
                }
            })
            .collect()
    }

    fn period_bounds(&self, range: f64) -> (f64, f64) {
        (
            self.period_min_factor * range,
            self.period_max_factor * range,
        )
    }
}

/// Largest pairwise distance between inputs, or 1 if they coincide.
fn input_range(inputs: &[Vec<f64>]) -> Result<f64> {
    let mut r = 0.0f64;
    for i in 0..inputs.len() {
        for j in i + 1..inputs.len() {
            r = r.max(distance(&inputs[i], &inputs[j])?);
        }
    }
    Ok(if r > 0.0 { r } else { 1.0 })
}

/// Objective in log-parameter space with box bounds.
struct Objective<'a> {
    inputs: &'a [Vec<f64>],
    targets: &'a [f64],
    template: KernelSpec,
    jitter: f64,
    noise_var: f64,
    mean_mode: MeanMode,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Objective<'_> {
    /// Maps log-parameters into the box; bound values are returned exactly.
    fn decode(&self, p: &[f64]) -> Result<KernelSpec> {
        let vals: Vec<f64> = p
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| {
                if !(*v > lo.ln()) {
                    *lo
                } else if *v >= hi.ln() {
                    *hi
                } else {
                    v.exp()
                }
            })
            .collect();
        let logs: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
        let mut spec = self.template.with_log_params(&logs)?;
        // restore exact values that ln/exp would perturb
        spec.sigma_f = vals[0];
        spec.sigma_l = vals[1];
        let mut next = 2;
        if spec.has_independent_summands() {
            spec.sigma_f2 = Some(vals[2]);
            spec.sigma_l2 = Some(vals[3]);
            next = 4;
        }
        if spec.kind != KernelKind::Gaussian {
            spec.period = vals[next];
        }
        Ok(spec)
    }

    fn lml(&self, spec: &KernelSpec) -> f64 {
        match GprModel::fit(
            self.inputs,
            self.targets,
            *spec,
            self.jitter,
            self.noise_var,
            self.mean_mode,
        ) {
            Ok(m) => {
                let v = m.log_marginal_likelihood();
                if v.is_finite() {
                    v
                } else {
                    f64::NEG_INFINITY
                }
            }
            Err(_) => f64::NEG_INFINITY,
        }
    }

    fn eval_log(&self, p: &[f64]) -> f64 {
        match self.decode(p) {
            Ok(spec) => self.lml(&spec),
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

/// Maximizes `f` by Nelder–Mead from `start`; returns the best point and value.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    start: &[f64],
    step: f64,
    max_evals: usize,
    rel_tol: f64,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut evals = 0usize;
    let eval = |p: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        // minimize the negated objective; failures are +inf
        let v = f(p);
        if v.is_finite() {
            -v
        } else {
            f64::INFINITY
        }
    };
    let f0 = eval(start, &mut evals);
    simplex.push((start.to_vec(), f0));
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += step;
        let v = eval(&p, &mut evals);
        simplex.push((p, v));
    }

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if best.is_finite()
            && worst.is_finite()
            && (worst - best).abs() <= rel_tol * (best.abs() + 1e-12)
        {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(p, _)| p[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst_point = simplex[dim].0.clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst_point)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[dim].1 {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < simplex[dim].1.min(fr) {
                simplex[dim] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = x0
                        .iter()
                        .zip(&entry.0)
                        .map(|(a, b)| a + 0.5 * (b - a))
                        .collect();
                    let v = eval(&p, &mut evals);
                    *entry = (p, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (p, v) = simplex.swap_remove(0);
    (p, -v)
}

/// Grid stage: the first point (in iteration order) with the highest
/// likelihood.
fn best_on_grid(
    obj: &Objective<'_>,
    candidates: impl Iterator<Item = KernelSpec>,
) -> Option<(KernelSpec, f64)> {
    let mut best: Option<(KernelSpec, f64)> = None;
    for spec in candidates {
        let v = obj.lml(&spec);
        if v.is_finite() && best.map_or(true, |(_, b)| v > b) {
            best = Some((spec, v));
        }
    }
    best
}

/// Maximizes the log marginal likelihood for a kernel family.
///
/// The grid stage covers `σ_f, σ_l` on the configured log grid and, for
/// periodic kernels, the period grid. The additive kernel with independent
/// summands starts instead from the best Gaussian and best periodic fits and
/// from variance-preserving splits of their amplitudes, since a full
/// five-dimensional grid is far too large. A bounded simplex search then
/// refines the best start. The procedure has no randomness.
pub fn optimize_hyperparameters(
    inputs: &[Vec<f64>],
    targets: &[f64],
    kind: KernelKind,
    jitter: f64,
    mean_mode: MeanMode,
    cfg: &SearchConfig,
) -> Result<KernelSpec> {
    cfg.validate()?;
    if inputs.len() < 2 || inputs.len() != targets.len() {
        return Err(Error::InvalidArgument(format!(
            "hyperparameter search needs at least two samples, got {} inputs and {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    let range = input_range(inputs)?;
    let scales = cfg.scale_grid();
    let periods = cfg.period_grid(range);
    let (s_lo, s_hi) = (cfg.scale_min, cfg.scale_max);
    let (p_lo, p_hi) = cfg.period_bounds(range);

    let objective = |template: KernelSpec, lower: Vec<f64>, upper: Vec<f64>| Objective {
        inputs,
        targets,
        template,
        jitter,
        noise_var: cfg.noise_var,
        mean_mode,
        lower,
        upper,
    };
    let refine = |obj: &Objective<'_>, start: KernelSpec, start_val: f64| -> Result<KernelSpec> {
        let (p, v) = nelder_mead(
            |p| obj.eval_log(p),
            &start.log_params(),
            (10f64).ln() / cfg.points_per_decade as f64,
            cfg.max_evals,
            cfg.rel_tol,
        );
        if v.is_finite() && v > start_val {
            obj.decode(&p)
        } else {
            Ok(start)
        }
    };

    let gaussian_grid = || {
        scales
            .iter()
            .flat_map(|sf| scales.iter().map(move |sl| KernelSpec::gaussian(*sf, *sl)))
    };
    let periodic_grid = |make: fn(f64, f64, f64) -> KernelSpec| {
        let scales = &scales;
        let periods = &periods;
        scales.iter().flat_map(move |sf| {
            scales
                .iter()
                .flat_map(move |sl| periods.iter().map(move |p| make(*sf, *sl, *p)))
        })
    };

    let result = match kind {
        KernelKind::Gaussian => {
            let obj = objective(KernelSpec::gaussian(1.0, 1.0), vec![s_lo; 2], vec![s_hi; 2]);
            let (start, v) = best_on_grid(&obj, gaussian_grid()).ok_or(Error::DegenerateData)?;
            refine(&obj, start, v)?
        }
        KernelKind::Periodic => {
            let obj = objective(
                KernelSpec::periodic(1.0, 1.0, 1.0),
                vec![s_lo, s_lo, p_lo],
                vec![s_hi, s_hi, p_hi],
            );
            let (start, v) = best_on_grid(&obj, periodic_grid(KernelSpec::periodic))
                .ok_or(Error::DegenerateData)?;
            refine(&obj, start, v)?
        }
        KernelKind::Additive if cfg.shared_additive => {
            let obj = objective(
                KernelSpec::additive_shared(1.0, 1.0, 1.0),
                vec![s_lo, s_lo, p_lo],
                vec![s_hi, s_hi, p_hi],
            );
            let (start, v) = best_on_grid(&obj, periodic_grid(KernelSpec::additive_shared))
                .ok_or(Error::DegenerateData)?;
            refine(&obj, start, v)?
        }
        KernelKind::Additive => {
            let g = optimize_hyperparameters(
                inputs,
                targets,
                KernelKind::Gaussian,
                jitter,
                mean_mode,
                cfg,
            )?;
            let p = optimize_hyperparameters(
                inputs,
                targets,
                KernelKind::Periodic,
                jitter,
                mean_mode,
                cfg,
            )?;
            let obj = objective(
                KernelSpec::additive(1.0, 1.0, 1.0, 1.0, 1.0),
                vec![s_lo, s_lo, s_lo, s_lo, p_lo],
                vec![s_hi, s_hi, s_hi, s_hi, p_hi],
            );
            let clamp = |v: f64| v.clamp(s_lo, s_hi);
            let mut starts = vec![
                KernelSpec::additive(g.sigma_f, g.sigma_l, s_lo, p.sigma_l, p.period),
                KernelSpec::additive(s_lo, g.sigma_l, p.sigma_f, p.sigma_l, p.period),
            ];
            for w in [0.5, 0.1, 0.9, 0.01, 0.99] {
                starts.push(KernelSpec::additive(
                    clamp(g.sigma_f * f64::sqrt(w)),
                    g.sigma_l,
                    clamp(p.sigma_f * f64::sqrt(1.0 - w)),
                    p.sigma_l,
                    p.period,
                ));
            }
            // every fourth point of the scale grid in all five coordinates
            let coarse: Vec<f64> = scales.iter().step_by(4).copied().collect();
            let coarse = &coarse;
            let periods = &periods;
            let grid = coarse.iter().flat_map(move |a| {
                coarse.iter().flat_map(move |b| {
                    coarse.iter().flat_map(move |c| {
                        coarse.iter().flat_map(move |d| {
                            periods
                                .iter()
                                .map(move |q| KernelSpec::additive(*a, *b, *c, *d, *q))
                        })
                    })
                })
            });
            let (start, v) =
                best_on_grid(&obj, starts.into_iter().chain(grid)).ok_or(Error::DegenerateData)?;
            refine(&obj, start, v)?
        }
    };
    log::debug!("optimized {kind} kernel: {result:?}");
    Ok(result)
}
