//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Run with `cargo test -p qsbo-cli --test acceptance`.

use std::fmt::Write as _;
use std::panic;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qsbo_cli::{emit_reports, run_experiment, Experiment, ExperimentPlan};
use qsbo_core::acquisition::expected_improvement;
use qsbo_core::benchmarks;
use qsbo_core::normal;
use qsbo_core::optimizer::{qsbo_run, Method, OptimizerConfig};
use qsbo_core::rank_transform::beta_order_variance;
use qsbo_core::stats::{
    paired_t_test, signed_rank_distribution, signed_rank_distribution_untied, welch_t_test,
    wilcoxon_signed_rank,
};
use qsbo_core::surrogate::{
    kernel_eval, log_marginal_likelihood, KernelFamily, KernelSpec, SurrogateModel,
};
use qsbo_core::Points;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Outcome of one criterion: pass flag plus a one-line detail.
type Outcome = (bool, String);

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Outcome {
    const SAMPLES: usize = 1_000_000;
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for n in [2usize, 5, 10, 20] {
        let mut sum = vec![0.0; n];
        let mut sum_sq = vec![0.0; n];
        let mut buf = vec![0.0; n];
        for _ in 0..SAMPLES {
            buf.iter_mut().for_each(|u| *u = rng.random::<f64>());
            buf.sort_unstable_by(f64::total_cmp);
            for (k, &u) in buf.iter().enumerate() {
                sum[k] += u;
                sum_sq[k] += u * u;
            }
        }
        for r in 1..=n {
            let mean = sum[r - 1] / SAMPLES as f64;
            let var = (sum_sq[r - 1] / SAMPLES as f64 - mean * mean) * SAMPLES as f64
                / (SAMPLES - 1) as f64;
            worst = worst.max(rel_err(var, beta_order_variance(r, n).unwrap()));
        }
    }
    let mut worst_probit = 0.0f64;
    for i in 0..=100_000 {
        let x = -5.0 + 10.0 * i as f64 / 100_000.0;
        worst_probit = worst_probit.max((normal::probit(normal::cdf(x)).unwrap() - x).abs());
    }
    (
        worst < 0.02 && worst_probit < 1e-8,
        format!("max beta variance rel err {worst:.4} (< 0.02), max probit round-trip err {worst_probit:.2e} (< 1e-8)"),
    )
}

/// Gauss-Jordan inverse with partial pivoting, plus log |det|.
fn dense_inverse(a: &[f64], n: usize) -> (Vec<f64>, f64) {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    let mut log_det = 0.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap();
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
                inv.swap(col * n + k, pivot * n + k);
            }
        }
        let p = m[col * n + col];
        log_det += p.abs().ln();
        for k in 0..n {
            m[col * n + k] /= p;
            inv[col * n + k] /= p;
        }
        for row in 0..n {
            if row != col {
                let f = m[row * n + col];
                for k in 0..n {
                    m[row * n + k] -= f * m[col * n + k];
                    inv[row * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    (inv, log_det)
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut lml_err, mut mean_err, mut var_err, mut max_jitter) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let n = rng.random_range(1..=20);
        let d = rng.random_range(1..=3);
        let family = if rng.random::<bool>() {
            KernelFamily::SquaredExponential
        } else {
            KernelFamily::Matern52
        };
        let spec = KernelSpec::new(
            family,
            (0..d).map(|_| rng.random_range(0.1..3.0)).collect(),
            rng.random_range(0.2..5.0),
        )
        .unwrap();
        let x = Points::new(d, (0..n * d).map(|_| rng.random::<f64>()).collect()).unwrap();
        let z: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let noise: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..2.0)).collect();

        let model = SurrogateModel::with_kernel(spec.clone(), &x, &z, &noise, None).unwrap();
        // the model factors K + noise + jitter I; the oracle inverts the same matrix
        max_jitter = max_jitter.max(model.jitter());
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = kernel_eval(&spec, x.row(i), x.row(j)).unwrap();
            }
            a[i * n + i] += noise[i] + model.jitter();
        }
        let (inv, log_det) = dense_inverse(&a, n);
        let quad: f64 = (0..n)
            .map(|i| (0..n).map(|j| z[i] * inv[i * n + j] * z[j]).sum::<f64>())
            .sum();
        let lml_oracle =
            -0.5 * quad - 0.5 * log_det - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
        let lml = log_marginal_likelihood(&x, &z, &noise, &spec).unwrap();
        lml_err = lml_err.max((lml - lml_oracle).abs() / lml_oracle.abs().max(1.0));

        for _ in 0..10 {
            let q: Vec<f64> = (0..d).map(|_| rng.random_range(-0.25..1.25)).collect();
            let k: Vec<f64> = x
                .rows()
                .map(|xi| kernel_eval(&spec, &q, xi).unwrap())
                .collect();
            let inv_k: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| inv[i * n + j] * k[j]).sum())
                .collect();
            let mean: f64 = inv_k.iter().zip(&z).map(|(a, b)| a * b).sum();
            let var = (spec.signal_variance
                - k.iter().zip(&inv_k).map(|(a, b)| a * b).sum::<f64>())
            .max(0.0);
            let p = model.predict(&q);
            mean_err = mean_err.max((p.mean - mean).abs() / mean.abs().max(1.0));
            var_err = var_err.max((p.variance - var).abs() / var.abs().max(1.0));
        }
    }
    let worst = lml_err.max(mean_err).max(var_err);
    (
        worst < 1e-8,
        format!("max error vs dense inverse over 50 instances: lml {lml_err:.1e}, mean {mean_err:.1e}, variance {var_err:.1e} (< 1e-8); jitter <= {max_jitter:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    const SAMPLES: usize = 10_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    // gamma = (best - mean) / sd spans both sides of the incumbent
    let triples: Vec<(f64, f64, f64)> = (0..100)
        .map(|_| {
            let best = rng.random_range(-2.0..2.0);
            let sd = rng.random_range(0.1..2.0);
            let gamma = rng.random_range(-2.0..2.0);
            (best - gamma * sd, sd, best)
        })
        .collect();
    let worst = triples
        .par_iter()
        .enumerate()
        .map(|(i, &(mean, sd, best))| {
            let mut rng = ChaCha8Rng::seed_from_u64(10_000 + i as u64);
            let mut acc = 0.0;
            for _ in 0..SAMPLES {
                let e: f64 = rng.sample(StandardNormal);
                acc += (best - mean - sd * e).max(0.0);
            }
            rel_err(expected_improvement(mean, sd, best), acc / SAMPLES as f64)
        })
        .reduce(|| 0.0, f64::max);
    (
        worst < 0.01,
        format!("max relative error vs Monte Carlo {worst:.4} over 100 triples (< 0.01)"),
    )
}

fn criterion_4() -> Outcome {
    let f = benchmarks::lookup("forrester").unwrap();
    let g = |x: &[f64]| (f.evaluate(x).unwrap() / 4.0).exp();
    let mut identical = 0;
    for seed in [0u64, 1, 7, 42, 1234] {
        let config = OptimizerConfig {
            seed,
            ..OptimizerConfig::default()
        };
        let a = qsbo_run(&f, f.domain(), &config).unwrap();
        let b = qsbo_run(&g, f.domain(), &config).unwrap();
        if a.inputs().eq(b.inputs()) {
            identical += 1;
        }
    }
    (
        identical == 5,
        format!("{identical}/5 seeds visit identical inputs under exp(y/4)"),
    )
}

fn criterion_5(experiment: &Experiment) -> Outcome {
    let report = &experiment.report;
    let mean = |f: &str, m: Method| {
        report
            .cell(f, m)
            .and_then(|c| c.summary.as_ref())
            .map(|s| s.mean)
    };
    let sd = |f: &str, m: Method| {
        report
            .cell(f, m)
            .and_then(|c| c.summary.as_ref())
            .map(|s| s.std_dev)
    };
    let mut detail = String::new();
    let mut pass = report.complete;

    let (bq, br) = (mean("branin", Method::Qsbo), mean("branin", Method::Random));
    let a = matches!((bq, br), (Some(q), Some(r)) if q <= 0.9 && r >= 1.0);
    let _ = write!(
        detail,
        "(a) branin {:.4} vs {:.4} {}; ",
        bq.unwrap_or(f64::NAN),
        br.unwrap_or(f64::NAN),
        ok(a)
    );
    let fq = mean("forrester", Method::Qsbo);
    let b = matches!(fq, Some(q) if q <= -5.95);
    let _ = write!(
        detail,
        "(b) forrester {:.4} {}; ",
        fq.unwrap_or(f64::NAN),
        ok(b)
    );
    let sq = mean("sinq1d", Method::Qsbo);
    let c = matches!(sq, Some(q) if q <= -0.49);
    let _ = write!(
        detail,
        "(c) sinq1d {:.4} {}; ",
        sq.unwrap_or(f64::NAN),
        ok(c)
    );
    let d = benchmarks::REGISTRY_KEYS.iter().all(
        |f| matches!((sd(f, Method::Qsbo), sd(f, Method::Random)), (Some(q), Some(r)) if q < r),
    );
    let _ = write!(detail, "(d) std below random {}; ", ok(d));
    let ps: Vec<f64> = benchmarks::REGISTRY_KEYS
        .iter()
        .map(|f| {
            report
                .tests_for(f)
                .and_then(|t| t.wilcoxon.as_ref())
                .map_or(f64::NAN, |w| w.p_value)
        })
        .collect();
    let e = ps.iter().all(|&p| p < 0.05) && ps.iter().filter(|&&p| p < 0.01).count() >= 2;
    let _ = write!(
        detail,
        "(e) wilcoxon p = {:.4}/{:.4}/{:.4} {}",
        ps[0],
        ps[1],
        ps[2],
        ok(e)
    );
    pass &= a && b && c && d && e;
    (pass, detail)
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "MISS"
    }
}

fn criterion_6() -> Outcome {
    let a = [1.0, 1.2, 0.9, 1.5, 1.1, 0.95, 1.3, 1.05];
    let b = [0.8, 1.25, 0.7, 1.1, 1.0, 1.0, 0.9, 0.85];
    let t = paired_t_test(&a, &b).unwrap();
    let w = wilcoxon_signed_rank(&a, &b).unwrap();
    let welch = welch_t_test(&a, &b).unwrap();
    let mut pass = rel_err(t.statistic, 2.857738033247041) < 1e-9
        && rel_err(t.p_value, 0.024416496097301163) < 1e-9
        && w.statistic == 3.0
        && rel_err(w.p_value, 0.0390625) < 1e-12
        && rel_err(welch.statistic, 1.8613560821740869) < 1e-9
        && rel_err(welch.p_value, 0.08418709236761195) < 1e-9;

    // differences 1, -2, -3, -4, -5: W+ = 1, P(W+ <= 1) = 2/32
    let w5 = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0, 4.0, 6.0, 8.0, 10.0]).unwrap();
    pass &= w5.statistic == 1.0 && rel_err(w5.p_value, 4.0 / 32.0) < 1e-12;

    let mut worst_sum = 0.0f64;
    for n in 1..=10 {
        let untied: f64 = signed_rank_distribution_untied(n).iter().sum();
        worst_sum = worst_sum.max((untied - 1.0).abs());
        // pairs of ties: doubled midranks 3,3,7,7,...
        let tied: Vec<u64> = (0..n as u64)
            .map(|i| {
                4 * (i / 2)
                    + if n as u64 % 2 == 1 && i == n as u64 - 1 {
                        2 * (i + 1)
                    } else {
                        3
                    }
            })
            .collect();
        worst_sum =
            worst_sum.max((signed_rank_distribution(&tied).iter().sum::<f64>() - 1.0).abs());
    }
    pass &= worst_sum < 1e-12;
    (pass, format!("frozen t/Wilcoxon/Welch values match; max |sum(pmf) - 1| = {worst_sum:.1e} for n <= 10"))
}

fn criterion_7(first: &Experiment) -> Outcome {
    let plan = ExperimentPlan::default();
    let second = run_experiment(&plan).expect("default plan is valid");
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    emit_reports(&first.report, &first.cells, da.path()).unwrap();
    emit_reports(&second.report, &second.cells, db.path()).unwrap();
    let a = std::fs::read(da.path().join("report.json")).unwrap();
    let b = std::fs::read(db.path().join("report.json")).unwrap();
    (
        a == b,
        format!(
            "report.json from two default-plan runs: {} bytes, identical = {}",
            a.len(),
            a == b
        ),
    )
}

fn run(id: u32, failures: &mut u32, f: impl FnOnce() -> Outcome + panic::UnwindSafe) {
    let start = Instant::now();
    let (pass, detail) = panic::catch_unwind(f).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        (false, format!("panicked: {}", msg.unwrap_or_default()))
    });
    if !pass {
        *failures += 1;
    }
    println!(
        "criterion {id}: {} [{}] {detail}",
        if pass { "PASS" } else { "FAIL" },
        secs(start.elapsed())
    );
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn main() -> ExitCode {
    let mut failures = 0;
    run(1, &mut failures, criterion_1);
    run(2, &mut failures, criterion_2);
    run(3, &mut failures, criterion_3);
    run(4, &mut failures, criterion_4);

    let start = Instant::now();
    let experiment = run_experiment(&ExperimentPlan::default());
    let plan_time = start.elapsed();
    match &experiment {
        Ok(e) => {
            let (pass, detail) = criterion_5(e);
            if !pass {
                failures += 1;
            }
            println!(
                "criterion 5: {} [{}] {detail}",
                if pass { "PASS" } else { "FAIL" },
                secs(plan_time)
            );
        }
        Err(e) => {
            failures += 1;
            println!("criterion 5: FAIL default plan rejected: {e}");
        }
    }
    run(6, &mut failures, criterion_6);
    match &experiment {
        Ok(e) => run(7, &mut failures, panic::AssertUnwindSafe(|| criterion_7(e))),
        Err(_) => {
            failures += 1;
            println!("criterion 7: FAIL default plan rejected");
        }
    }

    println!("{} of 7 criteria passed", 7 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
