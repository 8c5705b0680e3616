//! Rank-feedback Bayesian optimization.
//!
//! The optimizer never looks at objective values beyond their ordering: each
//! iteration the evaluated points are ranked, ranks become normalized
//! quantiles, quantiles are pushed through the probit transform, and the
//! Beta variance of the corresponding uniform order statistic becomes a
//! per-point noise term for an exact Gaussian process. Candidates are scored
//! on that latent scale with Expected Improvement (or PI/LCB).
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. All transcendental functions go through [`libm`].
//!
//! ```
//! use qsbo_core::benchmarks;
//! use qsbo_core::optimizer::{qsbo_run, OptimizerConfig};
//!
//! let forrester = benchmarks::lookup("forrester").unwrap();
//! let config = OptimizerConfig { n_iter: 5, n_candidates: 500, seed: 7, ..Default::default() };
//! let run = qsbo_run(&forrester, forrester.domain(), &config).unwrap();
//! assert_eq!(run.best_curve.len(), 10);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod acquisition;
pub mod benchmarks;
pub mod domain;
mod error;
mod linalg;
pub mod normal;
pub mod optimizer;
pub mod rank_transform;
pub mod stats;
pub mod surrogate;

pub use domain::{Domain, Points};
pub use error::{Error, Result};
