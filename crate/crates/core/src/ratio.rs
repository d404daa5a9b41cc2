//! Classifier-based estimate of `log p_M(x) / p_T(x)` on validation data.
//!
//! Simulated points are drawn from the tempered predictive, a
//! cross-validated discriminator separates them from the observed
//! validation points, and the out-of-fold log-odds (plus the class-size
//! offset `ln(n_obs / n_sim)`) estimate the per-point log density ratio.
//! The mean of those values estimates `-KL(p_T || p_M)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conjugate::TemperedPosterior;
use crate::data::Dataset;
use crate::discriminator::{
    cross_validated_log_odds_with, FeatureMap, DEFAULT_MAX_ITER, DEFAULT_RIDGE, DEFAULT_TOL,
};
use crate::error::{usage, Result};
use crate::numerics::RngStream;

/// Per-point log ratios with their sum and mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRatioEstimate {
    pub per_point: Vec<f64>,
    pub sum: f64,
    pub mean: f64,
    pub n: usize,
}

impl LogRatioEstimate {
    pub fn from_values(per_point: Vec<f64>) -> Result<Self> {
        if per_point.is_empty() {
            return Err(usage("a log-ratio estimate needs at least one point"));
        }
        let n = per_point.len();
        let sum: f64 = per_point.iter().sum();
        Ok(Self {
            mean: sum / n as f64,
            sum,
            n,
            per_point,
        })
    }

    /// Sample standard deviation (n - 1 divisor); zero for a single point.
    pub fn sd(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let ss: f64 = self.per_point.iter().map(|v| (v - self.mean).powi(2)).sum();
        (ss / (self.n - 1) as f64).sqrt()
    }

    pub fn std_error(&self) -> f64 {
        self.sd() / (self.n as f64).sqrt()
    }
}

/// Discriminator settings for a ratio estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub features: FeatureMap,
    pub folds: usize,
    pub ridge: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Simulated sample size; defaults to the validation size.
    pub n_sim: Option<usize>,
}

impl ClassifierConfig {
    pub fn new(features: FeatureMap) -> Self {
        Self {
            features,
            folds: 10,
            ridge: DEFAULT_RIDGE,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            n_sim: None,
        }
    }
}

/// Forward and reverse estimates from one simulated set and one
/// cross-validation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioEstimates {
    /// Evaluated at observed points; mean estimates `-KL(p_T || p_M)`.
    pub forward: LogRatioEstimate,
    /// Evaluated at simulated points, sign flipped; mean estimates
    /// `-KL(p_M || p_T)`.
    pub reverse: LogRatioEstimate,
}

/// Draws `n_sim` predictive points. Regression draws are made at
/// covariates resampled with replacement from the validation set.
pub fn simulate_predictive(
    post: &TemperedPosterior,
    validation: &Dataset,
    n_sim: usize,
    stream: &RngStream,
) -> Result<Dataset> {
    match validation.covariates() {
        Some(xs) => {
            let mut rng = stream.fork(0).rng();
            let resampled: Vec<f64> = (0..n_sim).map(|_| xs[rng.random_range(0..xs.len())]).collect();
            post.predictive_sample(&stream.fork(1), n_sim, Some(&resampled))
        }
        None => post.predictive_sample(&stream.fork(1), n_sim, None),
    }
}

pub fn estimate_log_ratios(
    post: &TemperedPosterior,
    validation: &Dataset,
    cfg: &ClassifierConfig,
    stream: &RngStream,
) -> Result<RatioEstimates> {
    if validation.is_empty() {
        return Err(usage("validation data must be non-empty"));
    }
    let n_obs = validation.len();
    let n_sim = cfg.n_sim.unwrap_or(n_obs);
    if n_sim < cfg.folds {
        return Err(usage(format!(
            "need at least {} simulated points for {}-fold cross-validation, got {n_sim}",
            cfg.folds, cfg.folds
        )));
    }
    let simulated = simulate_predictive(post, validation, n_sim, &stream.fork(1))?;
    let cv = cross_validated_log_odds_with(
        validation,
        &simulated,
        &cfg.features,
        cfg.folds,
        cfg.ridge,
        cfg.max_iter,
        cfg.tol,
        &stream.fork(2),
    )?;
    let offset = (n_obs as f64 / n_sim as f64).ln();
    let forward = cv.observed.iter().map(|v| v + offset).collect();
    let reverse = cv.simulated.iter().map(|v| -(v + offset)).collect();
    Ok(RatioEstimates {
        forward: LogRatioEstimate::from_values(forward)?,
        reverse: LogRatioEstimate::from_values(reverse)?,
    })
}

/// Classifier estimate of the per-point log ratio at the validation points.
pub fn estimate_log_ratio(
    post: &TemperedPosterior,
    validation: &Dataset,
    cfg: &ClassifierConfig,
    stream: &RngStream,
) -> Result<LogRatioEstimate> {
    Ok(estimate_log_ratios(post, validation, cfg, stream)?.forward)
}

/// Reverse-direction estimate, evaluated at the simulated points.
pub fn estimate_reverse_log_ratio(
    post: &TemperedPosterior,
    validation: &Dataset,
    cfg: &ClassifierConfig,
    stream: &RngStream,
) -> Result<LogRatioEstimate> {
    Ok(estimate_log_ratios(post, validation, cfg, stream)?.reverse)
}
