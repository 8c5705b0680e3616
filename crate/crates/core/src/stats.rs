//! Descriptive statistics and paired hypothesis tests.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::normal;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestResult {
    pub test_name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n_pairs: usize,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_variance(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(invalid("cannot summarize an empty list"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let m = mean(&sorted);
    Ok(SummaryStats {
        n,
        mean: m,
        median,
        std_dev: libm::sqrt(sample_variance(&sorted, m)),
        min: sorted[0],
        max: sorted[n - 1],
    })
}

fn differences(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(invalid(alloc::format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if !a.iter().chain(b).all(|v| v.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x - y).collect())
}

/// Paired t-test on `a - b`, two-sided.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    let d = differences(a, b)?;
    let n = d.len();
    if n < 2 {
        return Err(invalid("paired t-test needs at least two pairs"));
    }
    if d.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateData(
            "all paired differences are zero".into(),
        ));
    }
    let m = mean(&d);
    let sd = libm::sqrt(sample_variance(&d, m));
    if sd == 0.0 {
        return Err(Error::DegenerateData(
            "paired differences have zero variance".into(),
        ));
    }
    let t = m / (sd / libm::sqrt(n as f64));
    let p = (2.0 * t_sf(libm::fabs(t), (n - 1) as f64)).min(1.0);
    Ok(TestResult {
        test_name: "paired-t".into(),
        statistic: t,
        p_value: p,
        n_pairs: n,
    })
}

/// Welch's unequal-variance two-sample t-test, two-sided.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(invalid("Welch's test needs at least two values per sample"));
    }
    if !a.iter().chain(b).all(|v| v.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    let (ma, mb) = (mean(a), mean(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sample_variance(a, ma) / na, sample_variance(b, mb) / nb);
    if va + vb == 0.0 {
        return Err(Error::DegenerateData("both samples are constant".into()));
    }
    let t = (ma - mb) / libm::sqrt(va + vb);
    let df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let p = (2.0 * t_sf(libm::fabs(t), df)).min(1.0);
    Ok(TestResult {
        test_name: "welch-t".into(),
        statistic: t,
        p_value: p,
        n_pairs: a.len().min(b.len()),
    })
}

/// Largest effective sample size that gets an exact null distribution.
pub const WILCOXON_EXACT_MAX_N: usize = 25;

/// Wilcoxon signed-rank test on `a - b`, two-sided.
///
/// Zero differences are dropped, tied magnitudes get midranks, and the
/// statistic is `W = min(W+, W-)`. Up to [`WILCOXON_EXACT_MAX_N`] nonzero
/// pairs the p-value comes from the exact permutation distribution of the
/// signed-rank sum; beyond that a continuity-corrected normal approximation
/// with tie correction is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<TestResult> {
    let d: Vec<f64> = differences(a, b)?
        .into_iter()
        .filter(|&x| x != 0.0)
        .collect();
    if d.is_empty() {
        return Err(Error::DegenerateData(
            "all paired differences are zero".into(),
        ));
    }
    let n = d.len();
    let doubled = doubled_midranks(&d);
    let plus: u64 = d
        .iter()
        .zip(&doubled)
        .filter(|(x, _)| **x > 0.0)
        .map(|(_, &r)| r)
        .sum();
    let total = (n * (n + 1)) as u64;
    let w2 = plus.min(total - plus);
    let w = w2 as f64 / 2.0;

    let p = if n <= WILCOXON_EXACT_MAX_N {
        let pmf = signed_rank_distribution(&doubled);
        let lower: f64 = pmf[..=w2 as usize].iter().sum();
        (2.0 * lower).min(1.0)
    } else {
        let nf = n as f64;
        let expected = nf * (nf + 1.0) / 4.0;
        let mut var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
        var -= tie_group_sizes(&d)
            .map(|t| (t * t * t - t) as f64)
            .sum::<f64>()
            / 48.0;
        let z = (w - expected + 0.5) / libm::sqrt(var);
        (2.0 * normal::cdf(z.min(0.0))).min(1.0)
    };
    Ok(TestResult {
        test_name: "wilcoxon-signed-rank".into(),
        statistic: w,
        p_value: p,
        n_pairs: n,
    })
}

fn sorted_magnitudes(d: &[f64]) -> Vec<(usize, f64)> {
    let mut idx: Vec<(usize, f64)> = d.iter().map(|x| libm::fabs(*x)).enumerate().collect();
    idx.sort_by(|a, b| a.1.total_cmp(&b.1));
    idx
}

fn tie_group_sizes(d: &[f64]) -> impl Iterator<Item = u64> {
    let sorted = sorted_magnitudes(d);
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1].1 == sorted[i].1 {
            j += 1;
        }
        sizes.push((j - i + 1) as u64);
        i = j + 1;
    }
    sizes.into_iter()
}

/// Twice the midrank of each `|d_i|`, which is always an integer.
fn doubled_midranks(d: &[f64]) -> Vec<u64> {
    let sorted = sorted_magnitudes(d);
    let mut out = alloc::vec![0; d.len()];
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1].1 == sorted[i].1 {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1; the midrank doubled is i+j+2
        for &(orig, _) in &sorted[i..=j] {
            out[orig] = (i + j + 2) as u64;
        }
        i = j + 1;
    }
    out
}

/// Null distribution of the positive signed-rank sum, indexed by twice the
/// sum: entry `s` is the probability that the ranks carrying a positive sign
/// add up to `s / 2`, with every sign pattern equally likely.
pub fn signed_rank_distribution(doubled_ranks: &[u64]) -> Vec<f64> {
    let total: u64 = doubled_ranks.iter().sum();
    let mut counts = alloc::vec![0.0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            let c = counts[s];
            if c != 0.0 {
                counts[s + r] += c;
            }
        }
        reach += r;
    }
    let norm = libm::ldexp(1.0, -(doubled_ranks.len() as i32));
    counts.iter_mut().for_each(|c| *c *= norm);
    counts
}

/// Exact null distribution for `n` untied ranks `1..=n`.
pub fn signed_rank_distribution_untied(n: usize) -> Vec<f64> {
    let doubled: Vec<u64> = (1..=n as u64).map(|r| 2 * r).collect();
    signed_rank_distribution(&doubled)
}

/// Upper tail `P(T > t)` of Student's t with `df` degrees of freedom.
pub fn student_t_sf(t: f64, df: u32) -> f64 {
    assert!(df >= 1, "degrees of freedom must be positive");
    t_sf(t, df as f64)
}

fn t_sf(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 0.0 } else { 1.0 };
    }
    let x = df / (df + t * t);
    let tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
    if t > 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Regularized incomplete beta `I_x(a, b)` by Lentz's continued fraction.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "shape parameters must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if libm::fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if libm::fabs(delta - 1.0) < EPS {
            break;
        }
    }
    h
}
