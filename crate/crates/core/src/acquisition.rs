//! Acquisition functions on the latent (z) scale, all for minimization.

use crate::domain::Points;
use crate::error::{invalid, Result};
use crate::normal;
use crate::surrogate::SurrogateModel;

/// Posterior standard deviations below this are treated as zero.
pub const DEFAULT_S_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AcquisitionKind {
    #[default]
    ExpectedImprovement,
    ProbabilityOfImprovement,
    LowerConfidenceBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AcquisitionSpec {
    pub kind: AcquisitionKind,
    /// Exploration weight for the lower confidence bound.
    pub kappa: f64,
    pub s_floor: f64,
}

impl Default for AcquisitionSpec {
    fn default() -> Self {
        Self {
            kind: AcquisitionKind::ExpectedImprovement,
            kappa: 2.0,
            s_floor: DEFAULT_S_FLOOR,
        }
    }
}

impl AcquisitionSpec {
    pub fn new(kind: AcquisitionKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(invalid("kappa must be positive"));
        }
        if !(self.s_floor > 0.0 && self.s_floor.is_finite()) {
            return Err(invalid("s_floor must be positive"));
        }
        Ok(())
    }

    /// Utility to be maximized.
    pub fn score(&self, mean: f64, sd: f64, best_z: f64) -> f64 {
        match self.kind {
            AcquisitionKind::ExpectedImprovement => ei(mean, sd, best_z, self.s_floor),
            AcquisitionKind::ProbabilityOfImprovement => pi(mean, sd, best_z, self.s_floor),
            AcquisitionKind::LowerConfidenceBound => -lower_confidence_bound(mean, sd, self.kappa),
        }
    }
}

fn ei(mean: f64, sd: f64, best_z: f64, s_floor: f64) -> f64 {
    if sd < s_floor {
        return 0.0;
    }
    let gamma = (best_z - mean) / sd;
    (sd * (normal::pdf(gamma) + gamma * normal::cdf(gamma))).max(0.0)
}

fn pi(mean: f64, sd: f64, best_z: f64, s_floor: f64) -> f64 {
    if sd < s_floor {
        return if mean < best_z { 1.0 } else { 0.0 };
    }
    normal::cdf((best_z - mean) / sd)
}

/// `E[max(best_z - Z, 0)]` for `Z ~ N(mean, sd²)`.
pub fn expected_improvement(mean: f64, sd: f64, best_z: f64) -> f64 {
    ei(mean, sd, best_z, DEFAULT_S_FLOOR)
}

/// `P(Z < best_z)` for `Z ~ N(mean, sd²)`.
pub fn probability_of_improvement(mean: f64, sd: f64, best_z: f64) -> f64 {
    pi(mean, sd, best_z, DEFAULT_S_FLOOR)
}

/// `mean - kappa·sd`; smaller is more promising.
pub fn lower_confidence_bound(mean: f64, sd: f64, kappa: f64) -> f64 {
    mean - kappa * sd
}

/// Index of the candidate with the highest acquisition score. Ties go to the
/// lowest index.
pub fn select_next(
    model: &SurrogateModel,
    candidates: &Points,
    spec: &AcquisitionSpec,
    best_z: f64,
) -> Result<usize> {
    spec.validate()?;
    if candidates.is_empty() {
        return Err(invalid("candidate set is empty"));
    }
    if candidates.dim() != model.kernel().dim() {
        return Err(invalid("candidate dimension does not match the model"));
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, x) in candidates.rows().enumerate() {
        let p = model.predict(x);
        let score = spec.score(p.mean, p.sd(), best_z);
        if score > best.1 {
            best = (i, score);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::{KernelFamily, KernelSpec};
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ei_examples() {
        assert!((expected_improvement(0.3, 1.0, 0.3) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!(expected_improvement(10.3, 0.1, 0.3) < 1e-20);
        assert_eq!(expected_improvement(-1.0, 0.0, 0.0), 0.0);
        assert_eq!(expected_improvement(1.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn ei_matches_textbook_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let mean = rng.random_range(-3.0..3.0);
            let sd = rng.random_range(0.01..3.0);
            let best = rng.random_range(-3.0..3.0);
            let z = (best - mean) / sd;
            let textbook = (best - mean) * normal::cdf(z) + sd * normal::pdf(z);
            assert!((expected_improvement(mean, sd, best) - textbook.max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn ei_increasing_in_sd_at_incumbent() {
        let mut prev = 0.0;
        for k in 1..200 {
            let v = expected_improvement(0.5, k as f64 * 0.05, 0.5);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn pi_examples() {
        assert_eq!(probability_of_improvement(0.0, 1.0, 0.0), 0.5);
        assert!((probability_of_improvement(-1.959_964, 1.0, 0.0) - 0.975).abs() < 1e-8);
        assert_eq!(probability_of_improvement(1.0, 0.0, 0.0), 0.0);
        assert_eq!(probability_of_improvement(-1.0, 0.0, 0.0), 1.0);
    }

    #[test]
    fn lcb_examples() {
        assert_eq!(lower_confidence_bound(1.0, 0.0, 3.0), 1.0);
        assert_eq!(lower_confidence_bound(1.0, 0.5, 2.0), 0.0);
        assert!(lower_confidence_bound(1.0, 0.6, 2.0) < lower_confidence_bound(1.0, 0.5, 2.0));
    }

    fn toy_model(xs: &[f64], zs: &[f64], noise: &[f64], lengthscale: f64) -> SurrogateModel {
        toy_model_with_signal(xs, zs, noise, lengthscale, 1.0)
    }

    fn toy_model_with_signal(
        xs: &[f64],
        zs: &[f64],
        noise: &[f64],
        lengthscale: f64,
        signal: f64,
    ) -> SurrogateModel {
        let spec =
            KernelSpec::new(KernelFamily::SquaredExponential, vec![lengthscale], signal).unwrap();
        SurrogateModel::with_kernel(spec, &Points::new(1, xs.to_vec()).unwrap(), zs, noise, None)
            .unwrap()
    }

    #[test]
    fn select_next_trivial_cases() {
        let m = toy_model(&[0.0], &[0.0], &[0.1], 1.0);
        let spec = AcquisitionSpec::default();
        assert_eq!(
            select_next(&m, &Points::new(1, vec![0.3]).unwrap(), &spec, 0.0).unwrap(),
            0
        );
        assert_eq!(
            select_next(&m, &Points::new(1, vec![0.7; 5]).unwrap(), &spec, 0.0).unwrap(),
            0
        );
        assert!(select_next(&m, &Points::new(1, vec![]).unwrap(), &spec, 0.0).is_err());
    }

    #[test]
    fn ei_prefers_uncertain_midpoint_over_known_extremes() {
        // ten well-separated points, tight lengthscale; ranks 1 and 10 sit at
        // x = 0 and x = 9, the midpoint 4.5 lies between ranks 5 and 6. The
        // prior sd of 3 covers the latent range; with a unit prior the noisy
        // rank-1 point still wins.
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let values = [0.0, 5.0, 3.0, 8.0, 2.0, 4.0, 6.0, 1.0, 7.0, 9.0];
        let t = crate::rank_transform::build_latent_targets(&values).unwrap();
        let zs: Vec<f64> = t.iter().map(|l| l.z).collect();
        let noise: Vec<f64> = t.iter().map(|l| l.variance).collect();
        let best = zs.iter().cloned().fold(f64::INFINITY, f64::min);
        let m = toy_model_with_signal(&xs, &zs, &noise, 0.2, 9.0);
        let candidates = Points::new(1, vec![0.0, 9.0, 4.5]).unwrap();
        let spec = AcquisitionSpec::default();
        let scores: Vec<f64> = candidates
            .rows()
            .map(|x| {
                let p = m.predict(x);
                spec.score(p.mean, p.sd(), best)
            })
            .collect();
        assert!(scores[2] > scores[0] && scores[2] > scores[1], "{scores:?}");
        assert_eq!(select_next(&m, &candidates, &spec, best).unwrap(), 2);
    }

    #[test]
    fn lcb_selection_maximizes_negated_bound() {
        let m = toy_model(&[0.0, 1.0], &[-1.0, 1.0], &[0.01, 0.01], 0.3);
        let spec = AcquisitionSpec {
            kind: AcquisitionKind::LowerConfidenceBound,
            ..Default::default()
        };
        let candidates = Points::new(1, vec![1.0, 0.0, 0.5]).unwrap();
        let idx = select_next(&m, &candidates, &spec, -1.0).unwrap();
        let bounds: Vec<f64> = candidates
            .rows()
            .map(|x| {
                let p = m.predict(x);
                lower_confidence_bound(p.mean, p.sd(), spec.kappa)
            })
            .collect();
        let min = bounds.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(bounds[idx], min);
    }

    #[test]
    fn spec_validation() {
        assert!(AcquisitionSpec {
            kappa: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(AcquisitionSpec {
            s_floor: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
