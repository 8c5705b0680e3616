//! Experiment runner for the rank-feedback optimizer: runs the
//! (function × method × seed) matrix, aggregates final values, and writes CSV
//! and JSON reports.

pub mod experiment;
pub mod plan;
pub mod report;

pub use experiment::{run_experiment, ComparisonReport, Experiment};
pub use plan::{parse_args, ExperimentPlan};
pub use report::emit_reports;
