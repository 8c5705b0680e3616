use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qsbo_core::benchmarks;
use qsbo_core::optimizer::{
    qsbo_run, random_search_run, Method, OptimizerConfig, RunError, RunResult,
};
use qsbo_core::stats::{
    paired_t_test, summarize, welch_t_test, wilcoxon_signed_rank, SummaryStats, TestResult,
};

use crate::plan::ExperimentPlan;

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("unknown benchmark function {0:?}")]
    UnknownFunction(String),
    #[error("plan needs at least one run, function and method")]
    Empty,
    #[error("invalid optimizer configuration: {0}")]
    Config(#[from] qsbo_core::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub seed: u64,
    pub error: String,
}

/// Final-value statistics for one (function, method) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub function: String,
    pub method: Method,
    pub runs_completed: usize,
    /// Present only when every planned run completed.
    pub summary: Option<SummaryStats>,
    pub failures: Vec<RunFailure>,
}

/// QS-BO vs random search on one function; `a - b` is `qsbo - random`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionTests {
    pub function: String,
    pub t_test: Option<TestResult>,
    pub wilcoxon: Option<TestResult>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n_runs: usize,
    pub base_seed: u64,
    pub config: OptimizerConfig,
    pub cells: Vec<CellReport>,
    pub tests: Vec<FunctionTests>,
    pub complete: bool,
}

impl ComparisonReport {
    pub fn cell(&self, function: &str, method: Method) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.function == function && c.method == method)
    }

    pub fn tests_for(&self, function: &str) -> Option<&FunctionTests> {
        self.tests.iter().find(|t| t.function == function)
    }
}

/// Every run of one (function, method) pair, in seed order.
#[derive(Debug, Clone)]
pub struct CellRuns {
    pub function: String,
    pub method: Method,
    pub seeds: Vec<u64>,
    pub runs: Vec<Result<RunResult, RunError>>,
}

impl CellRuns {
    pub fn finals(&self) -> Vec<Option<f64>> {
        self.runs
            .iter()
            .map(|r| r.as_ref().ok().map(|r| r.final_best))
            .collect()
    }

    fn complete_finals(&self) -> Option<Vec<f64>> {
        self.runs
            .iter()
            .map(|r| r.as_ref().ok().map(|r| r.final_best))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub report: ComparisonReport,
    pub cells: Vec<CellRuns>,
}

impl Experiment {
    pub fn cell(&self, function: &str, method: Method) -> Option<&CellRuns> {
        self.cells
            .iter()
            .find(|c| c.function == function && c.method == method)
    }
}

/// Runs the full plan. Runs execute in parallel; results are reassembled in
/// (function, method, seed) order, so the report does not depend on
/// scheduling. Run `i` of every method uses seed `base_seed + i`.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Experiment, PlanError> {
    if plan.n_runs == 0 || plan.functions.is_empty() || plan.methods.is_empty() {
        return Err(PlanError::Empty);
    }
    let functions = plan
        .functions
        .iter()
        .map(|name| {
            benchmarks::lookup(name).ok_or_else(|| PlanError::UnknownFunction(name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    plan.config.validate()?;

    let seeds: Vec<u64> = (0..plan.n_runs as u64)
        .map(|i| plan.base_seed.wrapping_add(i))
        .collect();
    let mut jobs: Vec<(usize, Method, u64)> = Vec::new();
    for f in 0..functions.len() {
        for &m in &plan.methods {
            jobs.extend(seeds.iter().map(|&s| (f, m, s)));
        }
    }
    let outcomes: Vec<Result<RunResult, RunError>> = jobs
        .par_iter()
        .map(|&(f, method, seed)| {
            let bench = &functions[f];
            match method {
                Method::Qsbo => {
                    let config = OptimizerConfig {
                        seed,
                        ..plan.config.clone()
                    };
                    qsbo_run(bench, bench.domain(), &config)
                }
                Method::Random => {
                    random_search_run(bench, bench.domain(), plan.config.budget(), seed)
                }
            }
        })
        .collect();

    let mut outcomes = outcomes.into_iter();
    let mut cells = Vec::new();
    for bench in &functions {
        for &method in &plan.methods {
            let runs: Vec<_> = outcomes.by_ref().take(seeds.len()).collect();
            cells.push(CellRuns {
                function: bench.name().to_string(),
                method,
                seeds: seeds.clone(),
                runs,
            });
        }
    }
    let report = assemble_report(plan, &cells);
    Ok(Experiment { report, cells })
}

fn assemble_report(plan: &ExperimentPlan, cells: &[CellRuns]) -> ComparisonReport {
    let cell_reports: Vec<CellReport> = cells
        .iter()
        .map(|c| {
            let failures: Vec<RunFailure> = c
                .runs
                .iter()
                .zip(&c.seeds)
                .filter_map(|(r, &seed)| {
                    r.as_ref().err().map(|e| RunFailure {
                        seed,
                        error: e.to_string(),
                    })
                })
                .collect();
            CellReport {
                function: c.function.clone(),
                method: c.method,
                runs_completed: c.runs.len() - failures.len(),
                summary: c.complete_finals().and_then(|v| summarize(&v).ok()),
                failures,
            }
        })
        .collect();

    let mut tests = Vec::new();
    if plan.methods.contains(&Method::Qsbo) && plan.methods.contains(&Method::Random) {
        for function in &plan.functions {
            let finals = |m: Method| {
                cells
                    .iter()
                    .find(|c| &c.function == function && c.method == m)
                    .and_then(CellRuns::complete_finals)
            };
            let mut entry = FunctionTests {
                function: function.clone(),
                t_test: None,
                wilcoxon: None,
                notes: Vec::new(),
            };
            match (finals(Method::Qsbo), finals(Method::Random)) {
                (Some(q), Some(r)) => {
                    let t = if plan.welch {
                        welch_t_test(&q, &r)
                    } else {
                        paired_t_test(&q, &r)
                    };
                    match t {
                        Ok(t) => entry.t_test = Some(t),
                        Err(e) => entry.notes.push(format!("t-test: {e}")),
                    }
                    match wilcoxon_signed_rank(&q, &r) {
                        Ok(w) => entry.wilcoxon = Some(w),
                        Err(e) => entry.notes.push(format!("wilcoxon: {e}")),
                    }
                }
                _ => entry
                    .notes
                    .push("incomplete runs; tests skipped".to_string()),
            }
            tests.push(entry);
        }
    }

    ComparisonReport {
        n_runs: plan.n_runs,
        base_seed: plan.base_seed,
        config: OptimizerConfig {
            seed: plan.base_seed,
            ..plan.config.clone()
        },
        complete: cell_reports.iter().all(|c| c.failures.is_empty()),
        cells: cell_reports,
        tests,
    }
}
