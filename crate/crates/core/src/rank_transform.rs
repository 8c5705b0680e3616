//! Ranks to Gaussian pseudo-observations with order-statistic noise.
//!
//! Rank 1 is the smallest objective value. A rank `r` among `n` maps to the
//! quantile `u = (r - 0.5) / n`, then to `z = Φ⁻¹(u)`. The uncertainty in `u`
//! is the variance of the `r`-th uniform order statistic,
//! `Beta(r, n - r + 1)`, carried to the `z` scale by the delta method.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::normal;

/// Default clip applied to quantiles, keeping them off `0` and `1`.
pub const DEFAULT_CLIP_EPSILON: f64 = 1e-6;
/// Default floor on `φ(z)` in the delta-method denominator.
pub const DEFAULT_PHI_FLOOR: f64 = 1e-10;

/// One-based ranks, a permutation of `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVector(Vec<usize>);

impl RankVector {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

/// Latent regression target derived from one rank.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatentTarget {
    pub u: f64,
    pub z: f64,
    pub variance: f64,
}

/// Numerical guards for the quantile pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuantileGuards {
    pub clip_epsilon: f64,
    pub phi_floor: f64,
    /// Ablation: treat ranks as exact (zero order-statistic variance).
    #[doc(hidden)]
    #[cfg_attr(feature = "serde", serde(default, skip_serializing))]
    pub point_mass: bool,
}

impl Default for QuantileGuards {
    fn default() -> Self {
        Self {
            clip_epsilon: DEFAULT_CLIP_EPSILON,
            phi_floor: DEFAULT_PHI_FLOOR,
            point_mass: false,
        }
    }
}

impl QuantileGuards {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 0.5) {
            return Err(invalid("clip_epsilon must lie in (0, 0.5)"));
        }
        if !(self.phi_floor > 0.0 && self.phi_floor.is_finite()) {
            return Err(invalid("phi_floor must be positive and finite"));
        }
        Ok(())
    }
}

/// Ranks values in ascending order; ties go to the earlier index.
pub fn compute_ranks(values: &[f64]) -> Result<RankVector> {
    if values.is_empty() {
        return Err(invalid("cannot rank an empty list"));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(invalid(alloc::format!(
            "value {} at index {i} is not finite",
            values[i]
        )));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps insertion order among equal values
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0; values.len()];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = pos + 1;
    }
    Ok(RankVector(ranks))
}

fn check_rank(r: usize, n: usize) -> Result<()> {
    if r == 0 || r > n {
        return Err(invalid(alloc::format!("rank {r} outside 1..={n}")));
    }
    Ok(())
}

/// `(r - 0.5) / n` clipped to `[ε, 1 - ε]` with the default ε.
pub fn normalized_rank(r: usize, n: usize) -> Result<f64> {
    normalized_rank_with(r, n, DEFAULT_CLIP_EPSILON)
}

pub fn normalized_rank_with(r: usize, n: usize, clip_epsilon: f64) -> Result<f64> {
    check_rank(r, n)?;
    let u = (r as f64 - 0.5) / n as f64;
    Ok(u.clamp(clip_epsilon, 1.0 - clip_epsilon))
}

/// Variance of the `r`-th of `n` uniform order statistics,
/// `r (n - r + 1) / ((n + 1)² (n + 2))`.
pub fn beta_order_variance(r: usize, n: usize) -> Result<f64> {
    check_rank(r, n)?;
    Ok(beta_order_variance_unchecked(r, n))
}

fn beta_order_variance_unchecked(r: usize, n: usize) -> f64 {
    let (r, n) = (r as f64, n as f64);
    r * (n - r + 1.0) / ((n + 1.0) * (n + 1.0) * (n + 2.0))
}

/// Delta-method variance on the `z` scale with default guards.
pub fn z_variance(r: usize, n: usize) -> Result<f64> {
    z_variance_with(r, n, &QuantileGuards::default())
}

pub fn z_variance_with(r: usize, n: usize, guards: &QuantileGuards) -> Result<f64> {
    let u = normalized_rank_with(r, n, guards.clip_epsilon)?;
    let z = normal::probit_unchecked(u);
    Ok(delta_variance(r, n, z, guards))
}

fn delta_variance(r: usize, n: usize, z: f64, guards: &QuantileGuards) -> f64 {
    if guards.point_mass {
        return 0.0;
    }
    let density = normal::pdf(z).max(guards.phi_floor);
    beta_order_variance_unchecked(r, n) / (density * density)
}

/// Full pipeline with default guards; output order matches `values`.
pub fn build_latent_targets(values: &[f64]) -> Result<Vec<LatentTarget>> {
    build_latent_targets_with(values, &QuantileGuards::default())
}

pub fn build_latent_targets_with(
    values: &[f64],
    guards: &QuantileGuards,
) -> Result<Vec<LatentTarget>> {
    guards.validate()?;
    let ranks = compute_ranks(values)?;
    let n = ranks.len();
    ranks
        .as_slice()
        .iter()
        .map(|&r| {
            let u = normalized_rank_with(r, n, guards.clip_epsilon)?;
            let z = normal::probit(u)?;
            Ok(LatentTarget {
                u,
                z,
                variance: delta_variance(r, n, z, guards),
            })
        })
        .collect()
}
