//! Choice of the tempering level `t` and diagnostic curves over a grid.
//!
//! `t*` maximises the tempered log predictive of the validation partition.
//! A coarse scan over the grid finds the best bracket and a golden-section
//! search on `log10(t)` refines it.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conjugate::{log_predictive_score, temper_update, Model, SufficientStats, TemperedPosterior};
use crate::data::Dataset;
use crate::error::{usage, Error, Result};
use crate::numerics::RngStream;
use crate::ratio::{estimate_log_ratios, ClassifierConfig, LogRatioEstimate};
use crate::testing::t_test_logz;
use crate::truths::{true_log_ratio, TruthSpec};

pub const DEFAULT_GRID_LO: f64 = 1e-8;
pub const DEFAULT_GRID_HI: f64 = 1.0;
pub const DEFAULT_GRID_COUNT: usize = 50;
/// Relative tolerance of the refinement, in units of `log10(t)`.
pub const REFINE_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridSpacing {
    LogUniform,
    Explicit,
}

/// Strictly increasing tempering values in `(0, 1]`.
///
/// Serialized as its textual form: `lo:hi:count` for log-uniform grids and
/// a comma-separated list otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TemperingGrid {
    values: Vec<f64>,
    spacing: GridSpacing,
}

impl TryFrom<String> for TemperingGrid {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TemperingGrid> for String {
    fn from(g: TemperingGrid) -> String {
        g.to_string()
    }
}

impl TemperingGrid {
    /// `count` points evenly spaced in `log10(t)` from `lo` to `hi`.
    /// A single point requires `lo == hi`.
    pub fn log_uniform(lo: f64, hi: f64, count: usize) -> Result<Self> {
        let in_range = |v: f64| v.is_finite() && v > 0.0 && v <= 1.0;
        if !in_range(lo) || !in_range(hi) {
            return Err(usage(format!("grid bounds must lie in (0, 1], got {lo} and {hi}")));
        }
        if count == 0 {
            return Err(usage("grid needs at least one point"));
        }
        if count == 1 {
            if lo != hi {
                return Err(usage("a one-point grid needs equal bounds"));
            }
            return Ok(Self {
                values: vec![lo],
                spacing: GridSpacing::LogUniform,
            });
        }
        if lo >= hi {
            return Err(usage(format!("grid lower bound {lo} must be below upper bound {hi}")));
        }
        let (a, b) = (lo.log10(), hi.log10());
        let step = (b - a) / (count - 1) as f64;
        let mut values: Vec<f64> = (0..count).map(|i| 10f64.powf(a + step * i as f64)).collect();
        // pin the endpoints exactly
        values[0] = lo;
        values[count - 1] = hi;
        Ok(Self {
            values,
            spacing: GridSpacing::LogUniform,
        })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(usage("grid needs at least one point"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0 && **v <= 1.0)) {
            return Err(usage(format!("grid values must lie in (0, 1], got {v}")));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage("grid values must be strictly increasing"));
        }
        Ok(Self {
            values,
            spacing: GridSpacing::Explicit,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> GridSpacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

impl Default for TemperingGrid {
    fn default() -> Self {
        Self::log_uniform(DEFAULT_GRID_LO, DEFAULT_GRID_HI, DEFAULT_GRID_COUNT)
            .expect("default grid is valid")
    }
}

/// Parses `lo:hi:count`, or an explicit list such as `0.001,0.1,1`.
impl FromStr for TemperingGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if !s.contains(':') {
            let values = s
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| usage(format!("cannot parse grid '{s}'")))?;
            return Self::explicit(values);
        }
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || usage(format!("grid must look like lo:hi:count, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let count: usize = parts[2].parse().map_err(|_| bad())?;
        Self::log_uniform(lo, hi, count)
    }
}

impl fmt::Display for TemperingGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.spacing {
            GridSpacing::LogUniform => write!(f, "{}:{}:{}", self.min(), self.max(), self.len()),
            GridSpacing::Explicit => {
                let v: Vec<String> = self.values.iter().map(f64::to_string).collect();
                write!(f, "{}", v.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimumMethod {
    /// Interior maximum refined by golden-section search.
    GoldenSection,
    /// Best grid value lies at an end of the grid.
    GridBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperingOptimum {
    pub t: f64,
    pub log_predictive: f64,
    pub at_boundary: bool,
    pub method: OptimumMethod,
}

/// Log tempered predictive of `validation` after tempering on `stats`.
fn score(model: &Model, stats: &SufficientStats, validation: &Dataset, t: f64) -> Result<f64> {
    log_predictive_score(&temper_update(model, stats, t)?, validation)
}

fn check_partitions(update: &Dataset, validation: &Dataset) -> Result<()> {
    if update.is_empty() || validation.is_empty() {
        return Err(usage("update and validation partitions must be non-empty"));
    }
    Ok(())
}

/// Finds `t*` maximising the tempered log predictive of `validation`.
pub fn optimize_t(
    model: &Model,
    update: &Dataset,
    validation: &Dataset,
    grid: &TemperingGrid,
) -> Result<TemperingOptimum> {
    check_partitions(update, validation)?;
    let stats = SufficientStats::from_dataset(update);
    let scores = grid
        .values()
        .par_iter()
        .map(|&t| score(model, &stats, validation, t))
        .collect::<Result<Vec<f64>>>()?;
    refine(model, &stats, validation, grid, &scores)
}

fn refine(
    model: &Model,
    stats: &SufficientStats,
    validation: &Dataset,
    grid: &TemperingGrid,
    scores: &[f64],
) -> Result<TemperingOptimum> {
    let values = grid.values();
    // first maximum wins ties, NaN never wins
    let best = scores
        .iter()
        .enumerate()
        .fold(None, |acc: Option<usize>, (i, s)| match acc {
            Some(j) if !(*s > scores[j]) => Some(j),
            _ if s.is_nan() => acc,
            _ => Some(i),
        })
        .ok_or_else(|| Error::Internal("tempered predictive is NaN across the grid".into()))?;
    if best == 0 || best == values.len() - 1 {
        return Ok(TemperingOptimum {
            t: values[best],
            log_predictive: scores[best],
            at_boundary: true,
            method: OptimumMethod::GridBoundary,
        });
    }

    let f = |u: f64| score(model, stats, validation, 10f64.powf(u));
    let (mut a, mut b) = (values[best - 1].log10(), values[best + 1].log10());
    let tol = REFINE_REL_TOL * values[best].log10().abs().max(1.0);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let (u, fu) = if fc >= fd { (c, fc) } else { (d, fd) };
    // never return something worse than the best grid point
    let (t, log_predictive) = if fu >= scores[best] {
        (10f64.powf(u), fu)
    } else {
        (values[best], scores[best])
    };
    Ok(TemperingOptimum {
        t,
        log_predictive,
        at_boundary: false,
        method: OptimumMethod::GoldenSection,
    })
}

/// One row of the diagnostic curve. Missing values are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub log_predictive: Option<f64>,
    pub logz_approx_sum: Option<f64>,
    pub logz_true_sum: Option<f64>,
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
}

impl CurvePoint {
    fn empty(t: f64) -> Self {
        Self {
            t,
            log_predictive: None,
            logz_approx_sum: None,
            logz_true_sum: None,
            t_stat: None,
            p_value: None,
        }
    }
}

/// Classifier estimate, exact value and test at `t*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarDiagnostics {
    pub t: f64,
    pub log_predictive: f64,
    pub at_boundary: bool,
    pub method: OptimumMethod,
    pub logz_approx_sum: f64,
    pub logz_approx_mean: f64,
    pub t_stat: Option<f64>,
    pub p_value: f64,
    pub logz_true_sum: Option<f64>,
    pub logz_true_mean: Option<f64>,
    /// Mean of the reverse-direction estimate, `-KL(p_M || p_T)`.
    pub reverse_logz_mean: Option<f64>,
    pub reverse_logz_true_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperingCurve {
    pub points: Vec<CurvePoint>,
    pub star: StarDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CurveOptions {
    /// Run the classifier at every grid point, not only at `t*`.
    pub full_classifier: bool,
    /// Also estimate the reverse divergence at `t*`.
    pub reverse_kl: bool,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Exact reverse log ratio: `log p_M - log p_T` at predictive draws, negated
/// so that its mean is `-KL(p_M || p_T)`.
fn true_reverse_mean(
    post: &TemperedPosterior,
    truth: &TruthSpec,
    validation: &Dataset,
    n: usize,
    stream: &RngStream,
) -> Result<f64> {
    let draws = crate::ratio::simulate_predictive(post, validation, n, stream)?;
    let est = true_log_ratio(post, truth, &draws)?;
    Ok(-est.mean)
}

fn grid_point(
    model: &Model,
    stats: &SufficientStats,
    truth: Option<&TruthSpec>,
    validation: &Dataset,
    t: f64,
    classifier: Option<&ClassifierConfig>,
    stream: &RngStream,
) -> CurvePoint {
    let mut row = CurvePoint::empty(t);
    let Ok(post) = temper_update(model, stats, t) else {
        return row;
    };
    row.log_predictive = log_predictive_score(&post, validation).ok().and_then(finite);
    if let Some(truth) = truth {
        row.logz_true_sum = true_log_ratio(&post, truth, validation).ok().and_then(|e| finite(e.sum));
    }
    if let Some(cfg) = classifier {
        if let Ok(est) = estimate_log_ratios(&post, validation, cfg, stream) {
            row.logz_approx_sum = finite(est.forward.sum);
            if let Ok(test) = t_test_logz(&est.forward) {
                row.t_stat = finite(test.statistic);
                row.p_value = Some(test.p_value);
            }
        }
    }
    row
}

/// Tempered predictive scores (and, on request, classifier estimates) over
/// the grid, plus the full diagnostic at `t*`.
///
/// A grid point that fails is recorded with missing values. The exact log
/// ratio is filled in whenever `truth` is given.
#[allow(clippy::too_many_arguments)]
pub fn curve(
    model: &Model,
    truth: Option<&TruthSpec>,
    update: &Dataset,
    validation: &Dataset,
    grid: &TemperingGrid,
    classifier: &ClassifierConfig,
    options: CurveOptions,
    stream: &RngStream,
) -> Result<TemperingCurve> {
    check_partitions(update, validation)?;
    let stats = SufficientStats::from_dataset(update);
    let grid_stream = stream.fork(1);
    let full = options.full_classifier.then_some(classifier);
    let points: Vec<CurvePoint> = grid
        .values()
        .par_iter()
        .enumerate()
        .map(|(i, &t)| grid_point(model, &stats, truth, validation, t, full, &grid_stream.fork(i as u64)))
        .collect();

    let scores: Vec<f64> = points
        .iter()
        .map(|p| p.log_predictive.unwrap_or(f64::NEG_INFINITY))
        .collect();
    if scores.iter().all(|s| *s == f64::NEG_INFINITY) {
        return Err(Error::Internal("tempered predictive failed at every grid point".into()));
    }
    let opt = refine(model, &stats, validation, grid, &scores)?;

    let post = temper_update(model, &stats, opt.t)?;
    let star_stream = stream.fork(2);
    let est = estimate_log_ratios(&post, validation, classifier, &star_stream)?;
    let test = t_test_logz(&est.forward)?;
    let exact: Option<LogRatioEstimate> = truth
        .map(|truth| true_log_ratio(&post, truth, validation))
        .transpose()?;
    let (reverse_logz_mean, reverse_logz_true_mean) = if options.reverse_kl {
        let rev_true = truth
            .map(|truth| true_reverse_mean(&post, truth, validation, est.reverse.n, &star_stream.fork(3)))
            .transpose()?;
        (Some(est.reverse.mean), rev_true)
    } else {
        (None, None)
    };

    Ok(TemperingCurve {
        points,
        star: StarDiagnostics {
            t: opt.t,
            log_predictive: opt.log_predictive,
            at_boundary: opt.at_boundary,
            method: opt.method,
            logz_approx_sum: est.forward.sum,
            logz_approx_mean: est.forward.mean,
            t_stat: finite(test.statistic),
            p_value: test.p_value,
            logz_true_sum: exact.as_ref().map(|e| e.sum),
            logz_true_mean: exact.as_ref().map(|e| e.mean),
            reverse_logz_mean,
            reverse_logz_true_mean,
        },
    })
}
