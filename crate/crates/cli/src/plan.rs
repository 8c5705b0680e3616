use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use qsbo_core::acquisition::{AcquisitionKind, AcquisitionSpec};
use qsbo_core::benchmarks::REGISTRY_KEYS;
use qsbo_core::optimizer::{Method, OptimizerConfig};
use qsbo_core::surrogate::KernelFamily;

/// What to run and where to put the results.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub functions: Vec<String>,
    pub methods: Vec<Method>,
    pub n_runs: usize,
    pub base_seed: u64,
    /// Optimizer settings; `seed` is overwritten per run.
    pub config: OptimizerConfig,
    pub out_dir: PathBuf,
    /// Use Welch's unpaired t-test instead of the paired test.
    pub welch: bool,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            functions: REGISTRY_KEYS.iter().map(|s| s.to_string()).collect(),
            methods: vec![Method::Qsbo, Method::Random],
            n_runs: 20,
            base_seed: 0,
            config: OptimizerConfig::default(),
            out_dir: PathBuf::from("./results"),
            welch: false,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Qsbo,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AcquisitionArg {
    Ei,
    Pi,
    Lcb,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelArg {
    Se,
    Matern52,
}

#[derive(Debug, Parser)]
#[command(
    name = "qsbo",
    about = "Rank-feedback Bayesian optimization vs random search on synthetic benchmarks"
)]
struct Args {
    /// Benchmark function (repeatable); defaults to all registered functions.
    #[arg(long = "function", value_parser = clap::builder::PossibleValuesParser::new(REGISTRY_KEYS))]
    functions: Vec<String>,
    /// Method to run (repeatable); defaults to both.
    #[arg(long = "method", value_enum)]
    methods: Vec<MethodArg>,
    /// Independent runs per (function, method).
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    runs: u32,
    /// Base seed; run i uses seed + i for every method.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Initial uniform-random evaluations per run.
    #[arg(long = "n-init", default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    n_init: u32,
    /// Model-guided evaluations after the initial design.
    #[arg(long = "n-iter", default_value_t = 30)]
    n_iter: u32,
    /// Candidate points drawn per BO iteration.
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u32).range(1..))]
    candidates: u32,
    /// Acquisition function.
    #[arg(long, value_enum, default_value_t = AcquisitionArg::Ei)]
    acquisition: AcquisitionArg,
    /// Surrogate kernel.
    #[arg(long, value_enum, default_value_t = KernelArg::Matern52)]
    kernel: KernelArg,
    /// Output directory.
    #[arg(long, default_value = "./results")]
    out: PathBuf,
    /// Report Welch's unpaired t-test instead of the paired t-test.
    #[arg(long)]
    welch: bool,
}

/// Parses command-line arguments (including the program name) into a plan.
pub fn parse_args<I, T>(argv: I) -> Result<ExperimentPlan, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv)?;
    let mut functions: Vec<String> = Vec::new();
    for f in args.functions {
        if !functions.contains(&f) {
            functions.push(f);
        }
    }
    if functions.is_empty() {
        functions = REGISTRY_KEYS.iter().map(|s| s.to_string()).collect();
    }
    let mut methods: Vec<Method> = Vec::new();
    for m in args.methods {
        let m = match m {
            MethodArg::Qsbo => Method::Qsbo,
            MethodArg::Random => Method::Random,
        };
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        methods = vec![Method::Qsbo, Method::Random];
    }
    let kind = match args.acquisition {
        AcquisitionArg::Ei => AcquisitionKind::ExpectedImprovement,
        AcquisitionArg::Pi => AcquisitionKind::ProbabilityOfImprovement,
        AcquisitionArg::Lcb => AcquisitionKind::LowerConfidenceBound,
    };
    let kernel = match args.kernel {
        KernelArg::Se => KernelFamily::SquaredExponential,
        KernelArg::Matern52 => KernelFamily::Matern52,
    };
    Ok(ExperimentPlan {
        functions,
        methods,
        n_runs: args.runs as usize,
        base_seed: args.seed,
        config: OptimizerConfig {
            n_init: args.n_init as usize,
            n_iter: args.n_iter as usize,
            n_candidates: args.candidates as usize,
            acquisition: AcquisitionSpec::new(kind),
            kernel,
            seed: args.seed,
            ..OptimizerConfig::default()
        },
        out_dir: args.out,
        welch: args.welch,
    })
}
