//! Classifier-based assessment of model misspecification for conjugate
//! Bayesian models, together with selection of a likelihood tempering level.
//!
//! The pipeline:
//!
//! 1. [`conjugate`] performs a tempered update `p(X|θ)^t p(θ)` for one of
//!    three conjugate families and exposes the closed-form predictive.
//! 2. [`tempering`] picks `t*` by maximising the tempered predictive score of
//!    a held-out validation partition.
//! 3. [`ratio`] trains a cross-validated logistic [`discriminator`] to
//!    separate observed points from predictive draws. Its out-of-fold
//!    log-odds estimate `log p_M(x) / p_T(x)` for every validation point,
//!    whose mean estimates the negative KL divergence `-KL(p_T || p_M)`.
//! 4. [`testing`] runs a one-tailed test of `E[log Z] = 0` against `< 0`.
//!
//! [`truths`] holds the benchmark data-generating processes with exact
//! densities, and [`scenario`] wires everything into reproducible runs.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conjugate;
pub mod data;
pub mod discriminator;
pub mod error;
pub mod numerics;
pub mod output;
pub mod ratio;
pub mod scenario;
pub mod tempering;
pub mod testing;
pub mod truths;

pub use conjugate::{Model, PosteriorParams, SufficientStats, TemperedPosterior};
pub use data::{Dataset, Point};
pub use discriminator::{FeatureMap, LabeledDesign, LogisticFit, Transform};
pub use error::{Error, Result};
pub use numerics::{Dist, RngStream};
pub use ratio::{ClassifierConfig, LogRatioEstimate};
pub use scenario::{ScenarioConfig, ScenarioName, ScenarioResult};
pub use tempering::{TemperingCurve, TemperingGrid};
pub use testing::{MisspecTestResult, TestMethod};
pub use truths::TruthSpec;
