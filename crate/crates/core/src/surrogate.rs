//! Exact Gaussian process regression with a per-point noise diagonal.
//!
//! The prior mean is zero. Observations are `z_i = g(x_i) + ε_i` with
//! `ε_i ~ N(0, Σ_ii)`, so the usual scalar noise term is replaced entirely by
//! the supplied diagonal. Hyperparameters (ARD lengthscales and the signal
//! variance) are fitted by maximizing the log marginal likelihood with a
//! multi-start, derivative-free coordinate search in log space.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::domain::{Domain, Points};
use crate::error::{invalid, Error, Result};
use crate::linalg::Cholesky;

const SQRT_5: f64 = 2.236_067_977_499_79;

/// Covariance function family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum KernelFamily {
    SquaredExponential,
    #[default]
    Matern52,
}

/// Stationary ARD kernel.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscales: Vec<f64>, signal_variance: f64) -> Result<Self> {
        let spec = Self {
            family,
            lengthscales,
            signal_variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit lengthscales and unit signal variance.
    pub fn unit(family: KernelFamily, dim: usize) -> Self {
        Self {
            family,
            lengthscales: alloc::vec![1.0; dim],
            signal_variance: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    fn validate(&self) -> Result<()> {
        if self.lengthscales.is_empty() {
            return Err(invalid("kernel needs at least one lengthscale"));
        }
        if !self.lengthscales.iter().all(|&l| l > 0.0 && l.is_finite()) {
            return Err(invalid("lengthscales must be positive and finite"));
        }
        if !(self.signal_variance > 0.0 && self.signal_variance.is_finite()) {
            return Err(invalid("signal variance must be positive and finite"));
        }
        Ok(())
    }

    /// Kernel value from the lengthscale-scaled squared distance.
    #[inline]
    fn at_scaled_sq_dist(&self, r2: f64) -> f64 {
        match self.family {
            KernelFamily::SquaredExponential => self.signal_variance * libm::exp(-0.5 * r2),
            KernelFamily::Matern52 => {
                let s = SQRT_5 * libm::sqrt(r2);
                self.signal_variance * (1.0 + s + 5.0 * r2 / 3.0) * libm::exp(-s)
            }
        }
    }

    fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a
            .iter()
            .zip(b)
            .zip(&self.lengthscales)
            .map(|((x, y), l)| {
                let t = (x - y) / l;
                t * t
            })
            .sum();
        self.at_scaled_sq_dist(r2)
    }
}

/// `k(a, b)` for the given kernel.
pub fn kernel_eval(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    spec.validate()?;
    if a.len() != spec.dim() || b.len() != spec.dim() {
        return Err(invalid(alloc::format!(
            "kernel of dimension {} applied to points of dimension {} and {}",
            spec.dim(),
            a.len(),
            b.len()
        )));
    }
    Ok(spec.eval_unchecked(a, b))
}

/// Posterior mean and variance on the latent scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn sd(&self) -> f64 {
        libm::sqrt(self.variance)
    }
}

fn check_training_data(inputs: &Points, targets: &[f64], noise_diag: &[f64]) -> Result<()> {
    let n = inputs.len();
    if n == 0 {
        return Err(invalid("at least one training point is required"));
    }
    if targets.len() != n || noise_diag.len() != n {
        return Err(invalid(alloc::format!(
            "{n} inputs but {} targets and {} noise entries",
            targets.len(),
            noise_diag.len()
        )));
    }
    if !inputs.as_slice().iter().all(|v| v.is_finite()) || !targets.iter().all(|v| v.is_finite()) {
        return Err(invalid("training inputs and targets must be finite"));
    }
    if !noise_diag.iter().all(|&s| s >= 0.0 && s.is_finite()) {
        return Err(invalid("noise variances must be finite and non-negative"));
    }
    Ok(())
}

/// Pairwise squared coordinate differences, lower triangle only, reused across
/// every hyperparameter evaluation during a fit.
struct PairwiseDiffs {
    n: usize,
    d: usize,
    sq: Vec<f64>,
}

impl PairwiseDiffs {
    fn new(inputs: &Points) -> Self {
        let (n, d) = (inputs.len(), inputs.dim());
        let mut sq = Vec::with_capacity(n * (n.saturating_sub(1)) / 2 * d);
        for i in 0..n {
            for j in 0..i {
                for (a, b) in inputs.row(i).iter().zip(inputs.row(j)) {
                    sq.push((a - b) * (a - b));
                }
            }
        }
        Self { n, d, sq }
    }

    fn covariance(&self, spec: &KernelSpec, noise_diag: &[f64]) -> Vec<f64> {
        let n = self.n;
        let inv_l2: Vec<f64> = spec.lengthscales.iter().map(|l| 1.0 / (l * l)).collect();
        let mut a = alloc::vec![0.0; n * n];
        let mut chunks = self.sq.chunks_exact(self.d);
        for i in 0..n {
            for j in 0..i {
                let diff = chunks.next().expect("pair count");
                let r2: f64 = diff.iter().zip(&inv_l2).map(|(s, w)| s * w).sum();
                let k = spec.at_scaled_sq_dist(r2);
                a[i * n + j] = k;
                a[j * n + i] = k;
            }
            a[i * n + i] = spec.signal_variance + noise_diag[i];
        }
        a
    }
}

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

/// Adds `jitter · mean(diag)` and factors, escalating ×10 on failure.
fn factor_with_jitter(mut a: Vec<f64>, n: usize) -> Option<(Cholesky, f64)> {
    let mean_diag = (0..n).map(|i| a[i * n + i]).sum::<f64>() / n as f64;
    if !(mean_diag > 0.0 && mean_diag.is_finite()) {
        return None;
    }
    let mut added = 0.0;
    let mut scale = JITTER_START;
    while scale <= JITTER_MAX * (1.0 + 1e-9) {
        let jitter = scale * mean_diag;
        for i in 0..n {
            a[i * n + i] += jitter - added;
        }
        added = jitter;
        if let Some(chol) = Cholesky::factor(&a, n) {
            return Some((chol, jitter));
        }
        scale *= 10.0;
    }
    None
}

fn lml_from_factor(chol: &Cholesky, targets: &[f64]) -> (f64, Vec<f64>) {
    let alpha = chol.solve(targets);
    let fit: f64 = targets.iter().zip(&alpha).map(|(z, a)| z * a).sum();
    let n = targets.len() as f64;
    (
        -0.5 * fit - 0.5 * chol.log_det() - 0.5 * n * libm::log(2.0 * PI),
        alpha,
    )
}

/// Log marginal likelihood of `targets` under the zero-mean GP with kernel
/// `spec` and noise diagonal `noise_diag`, evaluated on `train_inputs` as given.
pub fn log_marginal_likelihood(
    train_inputs: &Points,
    targets: &[f64],
    noise_diag: &[f64],
    spec: &KernelSpec,
) -> Result<f64> {
    check_training_data(train_inputs, targets, noise_diag)?;
    spec.validate()?;
    if spec.dim() != train_inputs.dim() {
        return Err(invalid("kernel and input dimensions differ"));
    }
    let n = train_inputs.len();
    let a = PairwiseDiffs::new(train_inputs).covariance(spec, noise_diag);
    let (chol, _) = factor_with_jitter(a, n).ok_or_else(factorization_failed)?;
    Ok(lml_from_factor(&chol, targets).0)
}

fn factorization_failed() -> Error {
    Error::Numerical("covariance matrix not positive definite after jitter escalation".into())
}

/// A fitted GP posterior. Immutable once built.
#[derive(Debug, Clone)]
pub struct SurrogateModel {
    kernel: KernelSpec,
    scaling: Option<Domain>,
    train_inputs: Points,
    targets: Vec<f64>,
    noise_diag: Vec<f64>,
    chol: Cholesky,
    alpha: Vec<f64>,
    jitter: f64,
    log_likelihood: f64,
}

impl SurrogateModel {
    /// Conditions the GP on the data with fixed hyperparameters. When
    /// `scaling` is given, inputs (training and query) are mapped from that
    /// box to the unit cube before the kernel sees them.
    pub fn with_kernel(
        kernel: KernelSpec,
        train_inputs: &Points,
        targets: &[f64],
        noise_diag: &[f64],
        scaling: Option<&Domain>,
    ) -> Result<Self> {
        check_training_data(train_inputs, targets, noise_diag)?;
        kernel.validate()?;
        if kernel.dim() != train_inputs.dim() {
            return Err(invalid("kernel and input dimensions differ"));
        }
        let inputs = match scaling {
            Some(domain) => scale_points(train_inputs, domain)?,
            None => train_inputs.clone(),
        };
        let diffs = PairwiseDiffs::new(&inputs);
        Self::assemble(
            kernel,
            &diffs,
            inputs,
            targets,
            noise_diag,
            scaling.cloned(),
        )
    }

    fn assemble(
        kernel: KernelSpec,
        diffs: &PairwiseDiffs,
        inputs: Points,
        targets: &[f64],
        noise_diag: &[f64],
        scaling: Option<Domain>,
    ) -> Result<Self> {
        let a = diffs.covariance(&kernel, noise_diag);
        let (chol, jitter) =
            factor_with_jitter(a, inputs.len()).ok_or_else(factorization_failed)?;
        let (log_likelihood, alpha) = lml_from_factor(&chol, targets);
        Ok(Self {
            kernel,
            scaling,
            train_inputs: inputs,
            targets: targets.to_vec(),
            noise_diag: noise_diag.to_vec(),
            chol,
            alpha,
            jitter,
            log_likelihood,
        })
    }

    /// Posterior at `x` (in the original input coordinates).
    ///
    /// Panics if `x` has the wrong dimension.
    pub fn predict(&self, x: &[f64]) -> Prediction {
        assert_eq!(x.len(), self.kernel.dim(), "query dimension mismatch");
        let mut scaled = alloc::vec![0.0; x.len()];
        let x = match &self.scaling {
            Some(domain) => {
                domain.to_unit(x, &mut scaled);
                &scaled[..]
            }
            None => x,
        };
        let mut k_star: Vec<f64> = self
            .train_inputs
            .rows()
            .map(|xi| self.kernel.eval_unchecked(x, xi))
            .collect();
        let mean: f64 = k_star.iter().zip(&self.alpha).map(|(k, a)| k * a).sum();
        self.chol.solve_lower_in_place(&mut k_star);
        let explained: f64 = k_star.iter().map(|v| v * v).sum();
        let variance = (self.kernel.signal_variance - explained).max(0.0);
        Prediction { mean, variance }
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    /// Training inputs as the kernel sees them (unit-cube coordinates when scaled).
    pub fn train_inputs(&self) -> &Points {
        &self.train_inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn noise_diag(&self) -> &[f64] {
        &self.noise_diag
    }

    /// Row-major lower-triangular factor of `K + Σ + jitter·I`.
    pub fn chol_factor(&self) -> &[f64] {
        self.chol.factor_data()
    }

    /// `(K + Σ + jitter·I)⁻¹ z`.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn len(&self) -> usize {
        self.chol.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_likelihood
    }
}

fn scale_points(points: &Points, domain: &Domain) -> Result<Points> {
    if domain.dim() != points.dim() {
        return Err(invalid("domain and input dimensions differ"));
    }
    let mut data = alloc::vec![0.0; points.as_slice().len()];
    for (row, out) in points.rows().zip(data.chunks_exact_mut(points.dim())) {
        domain.to_unit(row, out);
    }
    Points::new(points.dim(), data)
}

/// Settings for hyperparameter fitting. Bounds are in unit-cube units.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitOptions {
    pub family: KernelFamily,
    /// Number of starts; the first is always at unit hyperparameters.
    pub starts: usize,
    pub sweeps: usize,
    pub golden_iterations: usize,
    pub lengthscale_bounds: (f64, f64),
    pub signal_variance_bounds: (f64, f64),
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            family: KernelFamily::default(),
            starts: 8,
            sweeps: 3,
            golden_iterations: 20,
            lengthscale_bounds: (0.01, 10.0),
            signal_variance_bounds: (0.01, 100.0),
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo > 0.0 && lo < hi && hi.is_finite();
        if self.starts == 0 {
            return Err(invalid("at least one start is required"));
        }
        if !ok(self.lengthscale_bounds) || !ok(self.signal_variance_bounds) {
            return Err(invalid(
                "hyperparameter bounds must satisfy 0 < lower < upper < inf",
            ));
        }
        Ok(())
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizes `f` on `[lo, hi]` by golden-section search, also checking the
/// endpoints so a monotone objective lands on the bound.
fn golden_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, iterations: usize) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc > fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Fits kernel hyperparameters by maximizing the log marginal likelihood and
/// returns the conditioned model. Inputs are scaled from `domain` to the unit
/// cube. Deterministic for a given `rng` state.
pub fn fit<R: Rng + ?Sized>(
    train_inputs: &Points,
    targets: &[f64],
    noise_diag: &[f64],
    domain: &Domain,
    options: &FitOptions,
    rng: &mut R,
) -> Result<SurrogateModel> {
    check_training_data(train_inputs, targets, noise_diag)?;
    options.validate()?;
    if let Some(row) = train_inputs.rows().find(|x| !domain.contains(x)) {
        return Err(invalid(alloc::format!(
            "training input {row:?} outside the domain"
        )));
    }
    let d = train_inputs.dim();
    let inputs = scale_points(train_inputs, domain)?;
    let n = inputs.len();
    let diffs = PairwiseDiffs::new(&inputs);

    // parameter vector: log lengthscales, then log signal variance
    let bounds: Vec<(f64, f64)> = (0..d)
        .map(|_| options.lengthscale_bounds)
        .chain(core::iter::once(options.signal_variance_bounds))
        .map(|(lo, hi)| (libm::log(lo), libm::log(hi)))
        .collect();
    let spec_at = |theta: &[f64]| KernelSpec {
        family: options.family,
        lengthscales: theta[..d].iter().map(|t| libm::exp(*t)).collect(),
        signal_variance: libm::exp(theta[d]),
    };
    let objective = |theta: &[f64]| -> f64 {
        let a = diffs.covariance(&spec_at(theta), noise_diag);
        match factor_with_jitter(a, n) {
            Some((chol, _)) => {
                let v = lml_from_factor(&chol, targets).0;
                if v.is_finite() {
                    v
                } else {
                    f64::NEG_INFINITY
                }
            }
            None => f64::NEG_INFINITY,
        }
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in 0..options.starts {
        let mut theta: Vec<f64> = if start == 0 {
            alloc::vec![0.0; d + 1]
        } else {
            bounds
                .iter()
                .map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
                .collect()
        };
        let mut value = objective(&theta);
        for _ in 0..options.sweeps {
            for j in 0..=d {
                let (lo, hi) = bounds[j];
                let mut probe = theta.clone();
                let (x, fx) = golden_max(
                    |t| {
                        probe[j] = t;
                        objective(&probe)
                    },
                    lo,
                    hi,
                    options.golden_iterations,
                );
                if fx > value {
                    theta[j] = x;
                    value = fx;
                }
            }
        }
        if value > f64::NEG_INFINITY && best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((theta, value));
        }
    }
    let (theta, _) =
        best.ok_or_else(|| Error::Numerical("every hyperparameter start failed to factor".into()))?;
    SurrogateModel::assemble(
        spec_at(&theta),
        &diffs,
        inputs,
        targets,
        noise_diag,
        Some(domain.clone()),
    )
}
