//! Covariance kernels and Gram matrix assembly.
//!
//! * Gaussian: `σ_f² exp(−d² / (2σ_l²))`
//! * Periodic: `σ_f² exp(−2 sin²(π d / p) / σ_l²)`
//! * Additive: Gaussian plus Periodic, each with its own amplitude and length
//!   scale unless the second set is left unset, in which case the periodic
//!   summand reuses the Gaussian's.
//!
//! `d` is the Euclidean distance. It is computed once per pair, so evaluation
//! is exactly symmetric in its arguments.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelKind {
    Gaussian,
    Periodic,
    Additive,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [
        KernelKind::Gaussian,
        KernelKind::Periodic,
        KernelKind::Additive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Gaussian => "gaussian",
            KernelKind::Periodic => "periodic",
            KernelKind::Additive => "additive",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "k1" => Ok(KernelKind::Gaussian),
            "periodic" | "k2" => Ok(KernelKind::Periodic),
            "additive" | "k3" => Ok(KernelKind::Additive),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel '{other}' (expected gaussian, periodic or additive)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub sigma_f: f64,
    pub sigma_l: f64,
    /// Used by the periodic part only.
    pub period: f64,
    /// Periodic-summand amplitude of the additive kernel.
    pub sigma_f2: Option<f64>,
    /// Periodic-summand length scale of the additive kernel.
    pub sigma_l2: Option<f64>,
}

impl KernelSpec {
    pub fn gaussian(sigma_f: f64, sigma_l: f64) -> Self {
        Self {
            kind: KernelKind::Gaussian,
            sigma_f,
            sigma_l,
            period: 1.0,
            sigma_f2: None,
            sigma_l2: None,
        }
    }

    pub fn periodic(sigma_f: f64, sigma_l: f64, period: f64) -> Self {
        Self {
            kind: KernelKind::Periodic,
            sigma_f,
            sigma_l,
            period,
            sigma_f2: None,
            sigma_l2: None,
        }
    }

    pub fn additive(sigma_f: f64, sigma_l: f64, sigma_f2: f64, sigma_l2: f64, period: f64) -> Self {
        Self {
            kind: KernelKind::Additive,
            sigma_f,
            sigma_l,
            period,
            sigma_f2: Some(sigma_f2),
            sigma_l2: Some(sigma_l2),
        }
    }

    /// Additive kernel whose summands share `σ_f` and `σ_l`.
    pub fn additive_shared(sigma_f: f64, sigma_l: f64, period: f64) -> Self {
        Self {
            kind: KernelKind::Additive,
            sigma_f,
            sigma_l,
            period,
            sigma_f2: None,
            sigma_l2: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        check("sigma_f", self.sigma_f)?;
        check("sigma_l", self.sigma_l)?;
        check("period", self.period)?;
        if let Some(v) = self.sigma_f2 {
            check("sigma_f2", v)?;
        }
        if let Some(v) = self.sigma_l2 {
            check("sigma_l2", v)?;
        }
        if self.sigma_f2.is_some() != self.sigma_l2.is_some() {
            return Err(Error::InvalidArgument(
                "sigma_f2 and sigma_l2 must be given together".into(),
            ));
        }
        Ok(())
    }

    /// Amplitude and length scale of the periodic summand of an additive kernel.
    fn periodic_part(&self) -> (f64, f64) {
        (
            self.sigma_f2.unwrap_or(self.sigma_f),
            self.sigma_l2.unwrap_or(self.sigma_l),
        )
    }

    /// True for an additive kernel with independent summand parameters.
    pub fn has_independent_summands(&self) -> bool {
        self.kind == KernelKind::Additive && self.sigma_f2.is_some()
    }

    /// Kernel value at Euclidean distance `d`.
    pub fn eval_distance(&self, d: f64) -> f64 {
        match self.kind {
            KernelKind::Gaussian => gaussian(self.sigma_f, self.sigma_l, d),
            KernelKind::Periodic => periodic(self.sigma_f, self.sigma_l, self.period, d),
            KernelKind::Additive => {
                let (sf2, sl2) = self.periodic_part();
                gaussian(self.sigma_f, self.sigma_l, d) + periodic(sf2, sl2, self.period, d)
            }
        }
    }

    /// `κ(x, x)`.
    pub fn variance(&self) -> f64 {
        self.eval_distance(0.0)
    }

    /// The Gaussian and periodic summands of an additive kernel as standalone
    /// specs.
    pub fn summands(&self) -> Option<(KernelSpec, KernelSpec)> {
        (self.kind == KernelKind::Additive).then(|| {
            let (sf2, sl2) = self.periodic_part();
            (
                KernelSpec::gaussian(self.sigma_f, self.sigma_l),
                KernelSpec::periodic(sf2, sl2, self.period),
            )
        })
    }

    /// Natural logarithms of the free hyperparameters, in the order
    /// `σ_f, σ_l, [σ_f2, σ_l2,] [p]`.
    pub fn log_params(&self) -> Vec<f64> {
        let mut v = vec![self.sigma_f.ln(), self.sigma_l.ln()];
        if self.has_independent_summands() {
            v.push(self.sigma_f2.unwrap_or(self.sigma_f).ln());
            v.push(self.sigma_l2.unwrap_or(self.sigma_l).ln());
        }
        if self.kind != KernelKind::Gaussian {
            v.push(self.period.ln());
        }
        v
    }

    /// Inverse of [`log_params`](Self::log_params) for a spec of the same shape.
    pub fn with_log_params(&self, p: &[f64]) -> Result<Self> {
        let expected = self.log_params().len();
        if p.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "{} log parameters for a kernel with {expected}",
                p.len()
            )));
        }
        let mut out = *self;
        out.sigma_f = p[0].exp();
        out.sigma_l = p[1].exp();
        let mut next = 2;
        if self.has_independent_summands() {
            out.sigma_f2 = Some(p[2].exp());
            out.sigma_l2 = Some(p[3].exp());
            next = 4;
        }
        if self.kind != KernelKind::Gaussian {
            out.period = p[next].exp();
        }
        Ok(out)
    }
}

fn gaussian(sigma_f: f64, sigma_l: f64, d: f64) -> f64 {
    sigma_f * sigma_f * (-(d * d) / (2.0 * sigma_l * sigma_l)).exp()
}

fn periodic(sigma_f: f64, sigma_l: f64, period: f64, d: f64) -> f64 {
    let s = (PI * d / period).sin();
    sigma_f * sigma_f * (-2.0 * s * s / (sigma_l * sigma_l)).exp()
}

/// Euclidean distance between two points of equal dimension.
pub fn distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "points of dimension {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

pub fn eval_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let v = spec.eval_distance(distance(x, y)?);
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("kernel value for {spec:?}")));
    }
    Ok(v)
}

/// Gram matrix together with the spec and inputs that produced it.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub values: DMatrix<f64>,
    pub spec: KernelSpec,
    pub inputs: Vec<Vec<f64>>,
}

/// Assembles `(κ(x_i, x_j))`, computing the upper triangle and mirroring it.
pub fn kernel_matrix(spec: &KernelSpec, inputs: &[Vec<f64>]) -> Result<KernelMatrix> {
    let n = inputs.len();
    let mut values = DMatrix::zeros(n, n);
    let mut duplicates = 0usize;
    for i in 0..n {
        for j in i..n {
            let d = distance(&inputs[i], &inputs[j])?;
            if i != j && d == 0.0 {
                duplicates += 1;
            }
            let v = spec.eval_distance(d);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("Gram entry ({i},{j})")));
            }
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    if duplicates > 0 {
        log::warn!("kernel matrix built from {duplicates} pair(s) of identical inputs");
    }
    #[cfg(debug_assertions)]
    if n > 0 && n <= 256 && is_positive_definite_family(spec, inputs) {
        let trace: f64 = values.diagonal().iter().sum();
        let eig = crate::linalg::dense_eig_symmetric(&values)?;
        debug_assert!(
            eig[0] >= -1e-10 * trace,
            "Gram matrix is indefinite: {}",
            eig[0]
        );
    }
    Ok(KernelMatrix {
        values,
        spec: *spec,
        inputs: inputs.to_vec(),
    })
}

/// Whether the kernel is guaranteed positive semidefinite on these inputs.
///
/// The Gaussian kernel is, in any dimension. The periodic kernel of the
/// Euclidean distance is only guaranteed so for scalar inputs; in two or more
/// dimensions its Gram matrices can have negative eigenvalues.
pub fn is_positive_definite_family(spec: &KernelSpec, inputs: &[Vec<f64>]) -> bool {
    spec.kind == KernelKind::Gaussian || inputs.iter().all(|x| x.len() <= 1)
}

/// `(κ(x_1, z), …, κ(x_N, z))`.
pub fn cross_kernel_vector(spec: &KernelSpec, inputs: &[Vec<f64>], z: &[f64]) -> Result<Vec<f64>> {
    inputs
        .iter()
        .map(|x| Ok(spec.eval_distance(distance(x, z)?)))
        .collect()
}
