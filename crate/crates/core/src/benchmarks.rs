//! Synthetic test functions and their registry.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::domain::Domain;
use crate::error::{invalid, Result};
use crate::optimizer::Objective;

/// Registry keys in reporting order.
pub const REGISTRY_KEYS: [&str; 3] = ["sinq1d", "forrester", "branin"];

fn sinq_raw(x: f64) -> f64 {
    libm::sin(3.0 * x) + x * x - 0.7 * x
}

fn forrester_raw(x: f64) -> f64 {
    let a = 6.0 * x - 2.0;
    a * a * libm::sin(12.0 * x - 4.0)
}

fn branin_raw(x1: f64, x2: f64) -> f64 {
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let t = 1.0 / (8.0 * PI);
    let q = x2 - b * x1 * x1 + c * x1 - 6.0;
    q * q + 10.0 * (1.0 - t) * libm::cos(x1) + 10.0
}

fn check_interval(name: &str, x: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&x) {
        return Err(invalid(alloc::format!("{name}: {x} outside [{lo}, {hi}]")));
    }
    Ok(())
}

/// `sin(3x) + x² - 0.7x` on `[-2, 2]`.
pub fn sinusoidal_quadratic(x: f64) -> Result<f64> {
    check_interval("sinusoidal_quadratic", x, -2.0, 2.0)?;
    Ok(sinq_raw(x))
}

/// `(6x - 2)² sin(12x - 4)` on `[0, 1]`.
pub fn forrester(x: f64) -> Result<f64> {
    check_interval("forrester", x, 0.0, 1.0)?;
    Ok(forrester_raw(x))
}

/// Branin-Hoo on `[-5, 10] × [0, 15]`.
pub fn branin(x1: f64, x2: f64) -> Result<f64> {
    check_interval("branin x1", x1, -5.0, 10.0)?;
    check_interval("branin x2", x2, 0.0, 15.0)?;
    Ok(branin_raw(x1, x2))
}

/// A named test function over a box.
#[derive(Debug, Clone)]
pub struct BenchmarkFunction {
    name: &'static str,
    domain: Domain,
    raw: fn(&[f64]) -> f64,
}

impl BenchmarkFunction {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn dimension(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Checked evaluation; rejects points outside the domain.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(invalid(alloc::format!(
                "{}: point {x:?} outside the domain",
                self.name
            )));
        }
        Ok((self.raw)(x))
    }

    /// Minimum over a dense grid: 10⁴ points in 1-D, 500 per axis in 2-D
    /// (endpoints included). Returns the grid argmin and its value.
    pub fn known_optimum(&self) -> (Vec<f64>, f64) {
        let per_axis = if self.dimension() == 1 { 10_000 } else { 500 };
        self.grid_minimum(per_axis)
    }

    pub fn grid_minimum(&self, per_axis: usize) -> (Vec<f64>, f64) {
        assert!(per_axis >= 2);
        let d = self.dimension();
        let axis = |j: usize, k: usize| {
            let (lo, hi) = self.domain.bounds()[j];
            lo + (hi - lo) * k as f64 / (per_axis - 1) as f64
        };
        let mut index = vec![0usize; d];
        let mut x = vec![0.0; d];
        let mut best = (Vec::new(), f64::INFINITY);
        loop {
            for j in 0..d {
                x[j] = axis(j, index[j]);
            }
            let v = (self.raw)(&x);
            if v < best.1 {
                best = (x.clone(), v);
            }
            let mut j = 0;
            loop {
                if j == d {
                    return best;
                }
                index[j] += 1;
                if index[j] < per_axis {
                    break;
                }
                index[j] = 0;
                j += 1;
            }
        }
    }
}

impl Objective for BenchmarkFunction {
    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.raw)(x)
    }
}

/// All registered functions, in [`REGISTRY_KEYS`] order.
pub fn registry() -> Vec<BenchmarkFunction> {
    REGISTRY_KEYS.iter().filter_map(|k| lookup(k)).collect()
}

type RawFn = fn(&[f64]) -> f64;

pub fn lookup(name: &str) -> Option<BenchmarkFunction> {
    let (name, bounds, raw): (&'static str, Vec<(f64, f64)>, RawFn) = match name {
        "sinq1d" => ("sinq1d", vec![(-2.0, 2.0)], |x| sinq_raw(x[0])),
        "forrester" => ("forrester", vec![(0.0, 1.0)], |x| forrester_raw(x[0])),
        "branin" => ("branin", vec![(-5.0, 10.0), (0.0, 15.0)], |x| {
            branin_raw(x[0], x[1])
        }),
        _ => return None,
    };
    Some(BenchmarkFunction {
        name,
        domain: Domain::new(bounds).expect("static bounds"),
        raw,
    })
}
