use std::process::ExitCode;

use qsbo_cli::{emit_reports, parse_args, run_experiment};

fn main() -> ExitCode {
    let plan = match parse_args(std::env::args_os()) {
        Ok(plan) => plan,
        Err(e) => e.exit(),
    };
    let experiment = match run_experiment(&plan) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match emit_reports(&experiment.report, &experiment.cells, &plan.out_dir) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!(
                "error: cannot write reports to {}: {e}",
                plan.out_dir.display()
            );
            return ExitCode::FAILURE;
        }
    }
    for cell in &experiment.report.cells {
        if let Some(s) = &cell.summary {
            println!(
                "{:<10} {:<7} mean {:>12.4} median {:>12.4} std {:>10.4}",
                cell.function, cell.method, s.mean, s.median, s.std_dev
            );
        }
        for failure in &cell.failures {
            eprintln!(
                "{} {} seed {}: {}",
                cell.function, cell.method, failure.seed, failure.error
            );
        }
    }
    for t in &experiment.report.tests {
        if let (Some(tt), Some(w)) = (&t.t_test, &t.wilcoxon) {
            println!(
                "{:<10} t = {:.3} (p = {:.4})  W = {:.1} (p = {:.4})",
                t.function, tt.statistic, tt.p_value, w.statistic, w.p_value
            );
        }
    }
    if experiment.report.complete {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
