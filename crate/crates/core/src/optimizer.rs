//! The rank-driven BO loop and the random-search baseline.
//!
//! Both methods are minimization-only; wrap an objective in [`Maximize`] to
//! maximize it. Each run draws from three ChaCha streams derived from one
//! seed (initial design, candidate sets, hyperparameter restarts), so the
//! initial design is shared with random search under the same seed and is not
//! perturbed by the candidate-set size.

use alloc::vec::Vec;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::acquisition::{select_next, AcquisitionSpec};
use crate::domain::{Domain, Points};
use crate::error::{invalid, Error, Result};
use crate::rank_transform::{build_latent_targets_with, QuantileGuards};
use crate::surrogate::{fit, FitOptions, KernelFamily};

/// A black-box objective to be minimized.
pub trait Objective {
    fn evaluate(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64> Objective for F {
    fn evaluate(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Negates the wrapped objective so minimizing it maximizes the original.
#[derive(Debug, Clone, Copy)]
pub struct Maximize<O>(pub O);

impl<O: Objective> Objective for Maximize<O> {
    fn evaluate(&self, x: &[f64]) -> f64 {
        -self.0.evaluate(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Method {
    Qsbo,
    Random,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Qsbo => "qsbo",
            Method::Random => "random",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizerConfig {
    pub n_init: usize,
    pub n_iter: usize,
    pub n_candidates: usize,
    pub acquisition: AcquisitionSpec,
    pub kernel: KernelFamily,
    pub clip_epsilon: f64,
    pub phi_floor: f64,
    pub seed: u64,
    #[doc(hidden)]
    #[cfg_attr(feature = "serde", serde(default, skip_serializing))]
    pub point_mass: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let guards = QuantileGuards::default();
        Self {
            n_init: 5,
            n_iter: 30,
            n_candidates: 5000,
            acquisition: AcquisitionSpec::default(),
            kernel: KernelFamily::default(),
            clip_epsilon: guards.clip_epsilon,
            phi_floor: guards.phi_floor,
            seed: 0,
            point_mass: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_init == 0 {
            return Err(invalid("n_init must be at least 1"));
        }
        if self.n_candidates == 0 {
            return Err(invalid("n_candidates must be at least 1"));
        }
        self.acquisition.validate()?;
        self.guards().validate()
    }

    pub fn budget(&self) -> usize {
        self.n_init + self.n_iter
    }

    fn guards(&self) -> QuantileGuards {
        QuantileGuards {
            clip_epsilon: self.clip_epsilon,
            phi_floor: self.phi_floor,
            point_mass: self.point_mass,
        }
    }
}

/// One evaluated point. `rank`, `z` and `variance` reflect the ranking over
/// the whole run at the moment the run ended.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialRecord {
    pub input: Vec<f64>,
    pub value: f64,
    pub rank: usize,
    pub z: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunResult {
    pub method: Method,
    pub seed: u64,
    pub trials: Vec<TrialRecord>,
    pub best_curve: Vec<f64>,
    pub final_best: f64,
    pub final_best_input: Vec<f64>,
}

impl RunResult {
    pub fn inputs(&self) -> impl Iterator<Item = &[f64]> {
        self.trials.iter().map(|t| t.input.as_slice())
    }
}

/// A failed run, with everything evaluated before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub error: Error,
    pub method: Method,
    pub seed: u64,
    pub inputs: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} run (seed {}) failed after {} evaluations: {}",
            self.method,
            self.seed,
            self.values.len(),
            self.error
        )
    }
}

impl core::error::Error for RunError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        Some(&self.error)
    }
}

#[derive(Clone, Copy)]
enum Stream {
    Init = 0,
    Candidates = 1,
    Hyperparameters = 2,
}

fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

struct History {
    method: Method,
    seed: u64,
    inputs: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl History {
    fn new(method: Method, seed: u64, capacity: usize) -> Self {
        Self {
            method,
            seed,
            inputs: Vec::with_capacity(capacity),
            values: Vec::with_capacity(capacity),
        }
    }

    fn evaluate<O: Objective + ?Sized>(
        &mut self,
        objective: &O,
        x: Vec<f64>,
    ) -> Result<(), RunError> {
        let value = objective.evaluate(&x);
        if !value.is_finite() {
            let error = Error::Evaluation {
                index: self.values.len(),
                value,
            };
            return Err(self.fail(error));
        }
        self.inputs.push(x);
        self.values.push(value);
        Ok(())
    }

    fn fail(&mut self, error: Error) -> RunError {
        RunError {
            error,
            method: self.method,
            seed: self.seed,
            inputs: core::mem::take(&mut self.inputs),
            values: core::mem::take(&mut self.values),
        }
    }

    fn finish(mut self, guards: &QuantileGuards) -> Result<RunResult, RunError> {
        let latent = match build_latent_targets_with(&self.values, guards) {
            Ok(t) => t,
            Err(e) => return Err(self.fail(e)),
        };
        let ranks = crate::rank_transform::compute_ranks(&self.values).map_err(|e| self.fail(e))?;
        let mut best_curve = Vec::with_capacity(self.values.len());
        let mut best = f64::INFINITY;
        for &v in &self.values {
            best = best.min(v);
            best_curve.push(best);
        }
        let best_idx = ranks
            .as_slice()
            .iter()
            .position(|&r| r == 1)
            .expect("rank 1 present");
        let trials = self
            .inputs
            .into_iter()
            .zip(&self.values)
            .zip(ranks.as_slice())
            .zip(&latent)
            .map(|(((input, &value), &rank), l)| TrialRecord {
                input,
                value,
                rank,
                z: l.z,
                variance: l.variance,
            })
            .collect::<Vec<_>>();
        Ok(RunResult {
            method: self.method,
            seed: self.seed,
            final_best: self.values[best_idx],
            final_best_input: trials[best_idx].input.clone(),
            trials,
            best_curve,
        })
    }
}

/// Evaluates `budget` i.i.d. uniform points from the domain.
pub fn random_search_run<O: Objective + ?Sized>(
    objective: &O,
    domain: &Domain,
    budget: usize,
    seed: u64,
) -> Result<RunResult, RunError> {
    let mut history = History::new(Method::Random, seed, budget);
    if budget == 0 {
        return Err(history.fail(invalid("budget must be at least 1")));
    }
    let mut rng = stream(seed, Stream::Init);
    for _ in 0..budget {
        let mut x = Vec::with_capacity(domain.dim());
        domain.sample_into(&mut rng, &mut x);
        history.evaluate(objective, x)?;
    }
    history.finish(&QuantileGuards::default())
}

/// Runs the rank-driven BO loop: `n_init` uniform evaluations, then
/// `n_iter` iterations of rank → latent targets → GP fit → acquisition over
/// a fresh uniform candidate set → evaluation.
pub fn qsbo_run<O: Objective + ?Sized>(
    objective: &O,
    domain: &Domain,
    config: &OptimizerConfig,
) -> Result<RunResult, RunError> {
    let mut history = History::new(Method::Qsbo, config.seed, config.budget());
    if let Err(e) = config.validate() {
        return Err(history.fail(e));
    }
    let guards = config.guards();
    let fit_options = FitOptions {
        family: config.kernel,
        ..FitOptions::default()
    };
    let mut init_rng = stream(config.seed, Stream::Init);
    let mut candidate_rng = stream(config.seed, Stream::Candidates);
    let mut hyper_rng = stream(config.seed, Stream::Hyperparameters);

    for _ in 0..config.n_init {
        let mut x = Vec::with_capacity(domain.dim());
        domain.sample_into(&mut init_rng, &mut x);
        history.evaluate(objective, x)?;
    }

    for _ in 0..config.n_iter {
        let mut step = || -> Result<Vec<f64>> {
            // only the ordering of the values reaches the model
            let latent = build_latent_targets_with(&history.values, &guards)?;
            let targets: Vec<f64> = latent.iter().map(|l| l.z).collect();
            let noise: Vec<f64> = latent.iter().map(|l| l.variance).collect();
            let best_z = targets.iter().copied().fold(f64::INFINITY, f64::min);
            let inputs = Points::from_rows(&history.inputs)?;
            let model = fit(
                &inputs,
                &targets,
                &noise,
                domain,
                &fit_options,
                &mut hyper_rng,
            )?;
            let candidates = domain.sample(&mut candidate_rng, config.n_candidates);
            let chosen = select_next(&model, &candidates, &config.acquisition, best_z)?;
            Ok(candidates.row(chosen).to_vec())
        };
        match step() {
            Ok(x) => history.evaluate(objective, x)?,
            Err(e) => return Err(history.fail(e)),
        }
    }
    history.finish(&guards)
}
