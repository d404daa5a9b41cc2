//! Logistic-regression discriminator between observed and simulated data.
//!
//! Label 1 marks simulated (model) points and label 0 observed points, so
//! the fitted linear predictor is `ln P(sim | x) / P(obs | x)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Point};
use crate::error::{usage, Error, Result};
use crate::numerics::RngStream;

/// `|x|` is clamped to this before taking a logarithm.
pub const LN_ABS_FLOOR: f64 = 1e-12;

pub const DEFAULT_RIDGE: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-8;

/// A summary-statistic transform of a datapoint.
///
/// `x` is the value of a scalar point or the covariate of a pair; the `y`
/// transforms need a response and are only defined for pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Transform {
    X,
    AbsX,
    X2,
    X3,
    X4,
    LnAbsX,
    Y,
    AbsY,
    Y2,
    LnAbsY,
    YX,
    AbsYX,
    YX2,
}

impl Transform {
    pub const ALL: [Transform; 13] = [
        Transform::X,
        Transform::AbsX,
        Transform::X2,
        Transform::X3,
        Transform::X4,
        Transform::LnAbsX,
        Transform::Y,
        Transform::AbsY,
        Transform::Y2,
        Transform::LnAbsY,
        Transform::YX,
        Transform::AbsYX,
        Transform::YX2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Transform::X => "x",
            Transform::AbsX => "abs_x",
            Transform::X2 => "x2",
            Transform::X3 => "x3",
            Transform::X4 => "x4",
            Transform::LnAbsX => "ln_abs_x",
            Transform::Y => "y",
            Transform::AbsY => "abs_y",
            Transform::Y2 => "y2",
            Transform::LnAbsY => "ln_abs_y",
            Transform::YX => "yx",
            Transform::AbsYX => "abs_yx",
            Transform::YX2 => "yx2",
        }
    }

    pub fn needs_response(&self) -> bool {
        matches!(
            self,
            Transform::Y
                | Transform::AbsY
                | Transform::Y2
                | Transform::LnAbsY
                | Transform::YX
                | Transform::AbsYX
                | Transform::YX2
        )
    }

    pub fn apply(&self, point: &Point) -> Result<f64> {
        let x = point.x();
        let y = || {
            point
                .y()
                .ok_or_else(|| usage(format!("transform `{}` needs a response", self.name())))
        };
        Ok(match self {
            Transform::X => x,
            Transform::AbsX => x.abs(),
            Transform::X2 => x * x,
            Transform::X3 => x * x * x,
            Transform::X4 => (x * x) * (x * x),
            Transform::LnAbsX => x.abs().max(LN_ABS_FLOOR).ln(),
            Transform::Y => y()?,
            Transform::AbsY => y()?.abs(),
            Transform::Y2 => y()?.powi(2),
            Transform::LnAbsY => y()?.abs().max(LN_ABS_FLOOR).ln(),
            Transform::YX => y()? * x,
            Transform::AbsYX => (y()? * x).abs(),
            Transform::YX2 => (y()? * x).powi(2),
        })
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let alias = match key.as_str() {
            "|x|" => "abs_x",
            "x^2" => "x2",
            "x^3" => "x3",
            "x^4" => "x4",
            "ln|x|" => "ln_abs_x",
            "|y|" => "abs_y",
            "y^2" => "y2",
            "ln|y|" => "ln_abs_y",
            "y*x" | "xy" => "yx",
            "|y*x|" | "|yx|" => "abs_yx",
            "(y*x)^2" | "(yx)^2" => "yx2",
            other => other,
        };
        Transform::ALL
            .into_iter()
            .find(|t| t.name() == alias)
            .ok_or_else(|| usage(format!("unknown feature transform `{s}`")))
    }
}

impl TryFrom<String> for Transform {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Transform> for String {
    fn from(t: Transform) -> String {
        t.name().to_string()
    }
}

/// Ordered, non-empty list of transforms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Transform>", into = "Vec<Transform>")]
pub struct FeatureMap {
    transforms: Vec<Transform>,
}

impl FeatureMap {
    pub fn new(transforms: Vec<Transform>) -> Result<Self> {
        if transforms.is_empty() {
            return Err(usage("a feature map needs at least one transform"));
        }
        Ok(Self { transforms })
    }

    /// Parses a comma-separated list such as `x,x2,ln_abs_x`.
    pub fn parse_list(s: &str) -> Result<Self> {
        let ts = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::new(ts)
    }

    pub fn transforms(&self) -> &[Transform] {
        &self.transforms
    }

    pub fn len(&self) -> usize {
        self.transforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transforms.is_empty()
    }

    pub fn needs_response(&self) -> bool {
        self.transforms.iter().any(Transform::needs_response)
    }

    pub fn row(&self, point: &Point) -> Result<Vec<f64>> {
        self.transforms.iter().map(|t| t.apply(point)).collect()
    }

    pub fn rows(&self, data: &Dataset) -> Result<Vec<Vec<f64>>> {
        data.iter().map(|p| self.row(p)).collect()
    }
}

impl TryFrom<Vec<Transform>> for FeatureMap {
    type Error = Error;

    fn try_from(v: Vec<Transform>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FeatureMap> for Vec<Transform> {
    fn from(fm: FeatureMap) -> Self {
        fm.transforms
    }
}

impl fmt::Display for FeatureMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.transforms.iter().map(Transform::name).collect();
        f.write_str(&names.join(","))
    }
}

/// Per-column centring and scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Standardizer {
    /// Fits on `rows`. Constant columns get unit scale.
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a Vec<f64>>, dim: usize) -> Self {
        let mut n = 0usize;
        let mut means = vec![0.0; dim];
        let mut m2 = vec![0.0; dim];
        // Welford
        for row in rows {
            n += 1;
            for j in 0..dim {
                let d = row[j] - means[j];
                means[j] += d / n as f64;
                m2[j] += d * (row[j] - means[j]);
            }
        }
        let sds = m2
            .iter()
            .map(|&s| {
                let sd = if n > 1 { (s / (n - 1) as f64).sqrt() } else { 0.0 };
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { means, sds }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// Standardised feature rows with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDesign {
    pub features: Vec<Vec<f64>>,
    /// 1.0 = simulated, 0.0 = observed.
    pub labels: Vec<f64>,
    pub scaler: Standardizer,
}

impl LabeledDesign {
    /// Standardises raw rows with a scaler fitted on all of them.
    pub fn from_raw(raw: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if raw.len() != labels.len() {
            return Err(usage(format!(
                "{} feature rows but {} labels",
                raw.len(),
                labels.len()
            )));
        }
        let dim = raw.first().map_or(0, Vec::len);
        if raw.iter().any(|r| r.len() != dim) {
            return Err(usage("feature rows have inconsistent lengths"));
        }
        let scaler = Standardizer::fit(&raw, dim);
        let features = raw.iter().map(|r| scaler.apply(r)).collect();
        Ok(Self {
            features,
            labels,
            scaler,
        })
    }

    pub fn dim(&self) -> usize {
        self.scaler.means.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Feature rows for observed (label 0) then simulated (label 1) points,
/// standardised on their union.
pub fn build_design(observed: &Dataset, simulated: &Dataset, fm: &FeatureMap) -> Result<LabeledDesign> {
    if observed.is_empty() || simulated.is_empty() {
        return Err(usage("both observed and simulated data must be non-empty"));
    }
    let mut raw = fm.rows(observed)?;
    raw.extend(fm.rows(simulated)?);
    let mut labels = vec![0.0; observed.len()];
    labels.resize(observed.len() + simulated.len(), 1.0);
    LabeledDesign::from_raw(raw, labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub intercept: f64,
    pub weights: Vec<f64>,
    /// Ridge strength actually used; larger than requested if the normal
    /// equations had to be regularised further.
    pub ridge: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl LogisticFit {
    /// `intercept + weights · row` for an already standardised row.
    pub fn log_odds(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.weights.len() {
            return Err(usage(format!(
                "row has {} features, fit expects {}",
                row.len(),
                self.weights.len()
            )));
        }
        Ok(self.intercept + dot(&self.weights, row))
    }

    pub fn probability(&self, row: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.log_odds(row)?))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn penalized_loglik(design: &LabeledDesign, beta: &[f64], ridge: f64) -> f64 {
    let (b0, w) = (beta[0], &beta[1..]);
    let ll: f64 = design
        .features
        .iter()
        .zip(&design.labels)
        .map(|(row, &y)| {
            let eta = b0 + dot(w, row);
            if y > 0.5 {
                -softplus(-eta)
            } else {
                -softplus(eta)
            }
        })
        .sum();
    ll - 0.5 * ridge * w.iter().map(|v| v * v).sum::<f64>()
}

/// Ridge-penalised maximum likelihood by iteratively reweighted least
/// squares (Newton steps with step halving). The intercept is not
/// penalised.
pub fn fit_logistic(design: &LabeledDesign, ridge: f64, max_iter: usize, tol: f64) -> Result<LogisticFit> {
    if !(ridge >= 0.0) {
        return Err(usage(format!("ridge must be non-negative, got {ridge}")));
    }
    let n_pos = design.labels.iter().filter(|&&y| y > 0.5).count();
    if n_pos == 0 || n_pos == design.len() {
        return Err(usage("logistic fit needs both classes present"));
    }
    let p = design.dim();
    let k = p + 1;
    let mean_y = n_pos as f64 / design.len() as f64;
    let mut beta = vec![0.0; k];
    beta[0] = (mean_y / (1.0 - mean_y)).ln();

    let mut ridge_eff = ridge;
    let mut bumps = 0;
    let mut objective = penalized_loglik(design, &beta, ridge_eff);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let mut grad = DVector::<f64>::zeros(k);
        let mut hess = DMatrix::<f64>::zeros(k, k);
        let mut xrow = vec![1.0; k];
        for (row, &y) in design.features.iter().zip(&design.labels) {
            xrow[1..].copy_from_slice(row);
            let mu = sigmoid(dot(&beta, &xrow));
            let w = mu * (1.0 - mu);
            let r = y - mu;
            for a in 0..k {
                grad[a] += xrow[a] * r;
                let wa = w * xrow[a];
                for b in 0..=a {
                    hess[(a, b)] += wa * xrow[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                hess[(b, a)] = hess[(a, b)];
            }
        }

        let step = loop {
            let mut h = hess.clone();
            let mut g = grad.clone();
            for j in 1..k {
                h[(j, j)] += ridge_eff;
                g[j] -= ridge_eff * beta[j];
            }
            match h.cholesky() {
                Some(ch) => break Some(ch.solve(&g)),
                None if bumps < 3 => {
                    bumps += 1;
                    ridge_eff = if ridge_eff > 0.0 { ridge_eff * 10.0 } else { 1e-8 };
                    objective = penalized_loglik(design, &beta, ridge_eff);
                }
                None => break None,
            }
        };
        let Some(step) = step else {
            break;
        };

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + scale * s).collect();
            let obj = penalized_loglik(design, &cand, ridge_eff);
            if obj.is_finite() && obj >= objective - 1e-12 * objective.abs() {
                accepted = Some((cand, obj));
                break;
            }
            scale *= 0.5;
        }
        let Some((cand, obj)) = accepted else {
            // no ascent direction left at machine precision
            converged = step.iter().all(|s| s.abs() * scale < tol.max(1e-12));
            break;
        };
        debug_assert!(obj >= objective - 1e-9 * objective.abs().max(1.0));
        let change = cand
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        beta = cand;
        objective = obj;
        if change < tol {
            converged = true;
            break;
        }
    }

    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::Internal("logistic fit produced non-finite weights".into()));
    }
    Ok(LogisticFit {
        intercept: beta[0],
        weights: beta[1..].to_vec(),
        ridge: ridge_eff,
        converged,
        iterations,
    })
}

/// Out-of-fold log-odds for both classes.
#[derive(Debug, Clone, PartialEq)]
pub struct CvLogOdds {
    pub observed: Vec<f64>,
    pub simulated: Vec<f64>,
}

/// Stratified fold labels: each class is shuffled and dealt round-robin.
pub fn stratified_folds(n_observed: usize, n_simulated: usize, k: usize, stream: &RngStream) -> (Vec<usize>, Vec<usize>) {
    let mut rng = stream.rng();
    let mut deal = |n: usize| {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let mut folds = vec![0; n];
        for (pos, &i) in idx.iter().enumerate() {
            folds[i] = pos % k;
        }
        folds
    };
    let obs = deal(n_observed);
    let sim = deal(n_simulated);
    (obs, sim)
}

/// k-fold cross-validated log-odds. Every point of both classes gets exactly
/// one value from a model fitted without its fold; scaling is refitted on
/// each training split.
pub fn cross_validated_log_odds(
    observed: &Dataset,
    simulated: &Dataset,
    fm: &FeatureMap,
    k: usize,
    ridge: f64,
    stream: &RngStream,
) -> Result<CvLogOdds> {
    cross_validated_log_odds_with(observed, simulated, fm, k, ridge, DEFAULT_MAX_ITER, DEFAULT_TOL, stream)
}

#[allow(clippy::too_many_arguments)]
pub fn cross_validated_log_odds_with(
    observed: &Dataset,
    simulated: &Dataset,
    fm: &FeatureMap,
    k: usize,
    ridge: f64,
    max_iter: usize,
    tol: f64,
    stream: &RngStream,
) -> Result<CvLogOdds> {
    if k < 2 {
        return Err(usage(format!("cross-validation needs at least 2 folds, got {k}")));
    }
    if observed.len() < k || simulated.len() < k {
        return Err(usage(format!(
            "each class needs at least {k} points for {k}-fold cross-validation (observed {}, simulated {})",
            observed.len(),
            simulated.len()
        )));
    }
    let obs_rows = fm.rows(observed)?;
    let sim_rows = fm.rows(simulated)?;
    let (obs_fold, sim_fold) = stratified_folds(obs_rows.len(), sim_rows.len(), k, stream);
    let dim = fm.len();

    let per_fold = (0..k)
        .into_par_iter()
        .map(|f| {
            let train: Vec<(&Vec<f64>, f64)> = obs_rows
                .iter()
                .zip(&obs_fold)
                .filter(|(_, &g)| g != f)
                .map(|(r, _)| (r, 0.0))
                .chain(
                    sim_rows
                        .iter()
                        .zip(&sim_fold)
                        .filter(|(_, &g)| g != f)
                        .map(|(r, _)| (r, 1.0)),
                )
                .collect();
            let scaler = Standardizer::fit(train.iter().map(|(r, _)| *r), dim);
            let design = LabeledDesign {
                features: train.iter().map(|(r, _)| scaler.apply(r)).collect(),
                labels: train.iter().map(|(_, y)| *y).collect(),
                scaler: scaler.clone(),
            };
            let fit = fit_logistic(&design, ridge, max_iter, tol)?;
            let score = |rows: &[Vec<f64>], folds: &[usize]| -> Result<Vec<(usize, f64)>> {
                rows.iter()
                    .zip(folds)
                    .enumerate()
                    .filter(|(_, (_, &g))| g == f)
                    .map(|(i, (r, _))| Ok((i, fit.log_odds(&scaler.apply(r))?)))
                    .collect()
            };
            Ok((score(&obs_rows, &obs_fold)?, score(&sim_rows, &sim_fold)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = CvLogOdds {
        observed: vec![f64::NAN; obs_rows.len()],
        simulated: vec![f64::NAN; sim_rows.len()],
    };
    for (obs, sim) in per_fold {
        for (i, v) in obs {
            out.observed[i] = v;
        }
        for (i, v) in sim {
            out.simulated[i] = v;
        }
    }
    Ok(out)
}

/// Out-of-fold log-odds for the observed points only.
pub fn cv_log_odds(
    observed: &Dataset,
    simulated: &Dataset,
    fm: &FeatureMap,
    k: usize,
    ridge: f64,
    stream: &RngStream,
) -> Result<Vec<f64>> {
    Ok(cross_validated_log_odds(observed, simulated, fm, k, ridge, stream)?.observed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Dist;
    use rand::Rng;

    fn normal(mean: f64, n: usize, stream: u64) -> Dataset {
        Dataset::scalars(
            Dist::Normal { mean, sd: 1.0 }
                .sample(&RngStream::new(99, stream), n)
                .unwrap(),
        )
    }

    #[test]
    fn transform_names_round_trip() {
        for t in Transform::ALL {
            assert_eq!(t.name().parse::<Transform>().unwrap(), t);
        }
        assert_eq!("ln|x|".parse::<Transform>().unwrap(), Transform::LnAbsX);
        assert_eq!("(y*x)^2".parse::<Transform>().unwrap(), Transform::YX2);
        assert!("x5".parse::<Transform>().is_err());
        assert!(FeatureMap::parse_list("").is_err());
    }

    #[test]
    fn design_bookkeeping() {
        let fm = FeatureMap::parse_list("x").unwrap();
        let d = build_design(
            &Dataset::scalars(vec![1.0, 2.0]),
            &Dataset::scalars(vec![3.0, 4.0]),
            &fm,
        )
        .unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d.dim(), 1);
        assert_eq!(d.labels, vec![0.0, 0.0, 1.0, 1.0]);
        let col: Vec<f64> = d.features.iter().map(|r| r[0]).collect();
        let m = col.iter().sum::<f64>() / 4.0;
        let sd = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 3.0).sqrt();
        assert!(m.abs() < 1e-12 && (sd - 1.0).abs() < 1e-12);
    }

    #[test]
    fn raw_feature_values() {
        let fm = FeatureMap::parse_list("x,x2").unwrap();
        assert_eq!(fm.row(&Point::Scalar(3.0)).unwrap(), vec![3.0, 9.0]);
        let ln = FeatureMap::parse_list("ln_abs_x").unwrap();
        assert_eq!(ln.row(&Point::Scalar(0.0)).unwrap(), vec![1e-12f64.ln()]);
        let reg = FeatureMap::parse_list("abs_y,yx,yx2").unwrap();
        assert_eq!(
            reg.row(&Point::Pair { x: 2.0, y: -1.5 }).unwrap(),
            vec![1.5, -3.0, 9.0]
        );
        assert!(reg.row(&Point::Scalar(1.0)).is_err());
    }

    #[test]
    fn no_signal_gives_zero_fit() {
        let design = LabeledDesign::from_raw(
            vec![vec![0.0, 0.0]; 6],
            vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
        )
        .unwrap();
        let fit = fit_logistic(&design, DEFAULT_RIDGE, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert!(fit.converged);
        assert!(fit.intercept.abs() < 1e-12);
        assert!(fit.weights.iter().all(|w| w.abs() < 1e-12));
    }

    #[test]
    fn single_class_rejected() {
        let design = LabeledDesign::from_raw(vec![vec![1.0]; 3], vec![1.0; 3]).unwrap();
        assert!(fit_logistic(&design, 0.0, 10, 1e-8).is_err());
    }

    #[test]
    fn recovers_generating_weights() {
        // features are standard normal, so standardisation is nearly a no-op;
        // compare on the raw scale through the fitted scaler
        let n = 20_000;
        let mut rng = RngStream::new(7, 0).rng();
        let mut raw = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let a: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            let b: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng);
            let p = sigmoid(1.5 * a - 0.7 * b);
            labels.push(if rng.random::<f64>() < p { 1.0 } else { 0.0 });
            raw.push(vec![a, b]);
        }
        let design = LabeledDesign::from_raw(raw, labels).unwrap();
        let fit = fit_logistic(&design, 1e-6, 100, 1e-8).unwrap();
        assert!(fit.converged);
        let w: Vec<f64> = fit
            .weights
            .iter()
            .zip(&design.scaler.sds)
            .map(|(w, s)| w / s)
            .collect();
        assert!((w[0] - 1.5).abs() < 0.1, "{w:?}");
        assert!((w[1] + 0.7).abs() < 0.1, "{w:?}");
    }

    #[test]
    fn separable_classes_stay_finite() {
        let raw: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let labels: Vec<f64> = (0..40).map(|i| if i < 20 { 0.0 } else { 1.0 }).collect();
        let design = LabeledDesign::from_raw(raw, labels).unwrap();
        let fit = fit_logistic(&design, DEFAULT_RIDGE, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert!(fit.intercept.is_finite());
        assert!(fit.weights.iter().all(|w| w.is_finite()));
    }

    #[test]
    fn log_odds_basics() {
        let fit = LogisticFit {
            intercept: 0.0,
            weights: vec![0.0, 0.0],
            ridge: 0.0,
            converged: true,
            iterations: 0,
        };
        assert_eq!(fit.log_odds(&[3.0, -1.0]).unwrap(), 0.0);
        assert_eq!(fit.probability(&[3.0, -1.0]).unwrap(), 0.5);
        let fit = LogisticFit {
            intercept: 3f64.ln(),
            ..fit
        };
        assert_eq!(fit.log_odds(&[10.0, 7.0]).unwrap(), 3f64.ln());
        assert!(fit.log_odds(&[1.0]).is_err());
    }

    #[test]
    fn symmetric_classes_have_zero_log_odds_at_midpoint() {
        let obs = normal(-1.0, 5000, 1);
        let sim = normal(1.0, 5000, 2);
        let fm = FeatureMap::parse_list("x").unwrap();
        let design = build_design(&obs, &sim, &fm).unwrap();
        let fit = fit_logistic(&design, DEFAULT_RIDGE, 100, 1e-8).unwrap();
        let at_zero = fit.log_odds(&design.scaler.apply(&[0.0])).unwrap();
        // Bayes-optimal discriminant is 2x, zero at the origin
        assert!(at_zero.abs() < 0.1, "{at_zero}");
    }

    #[test]
    fn balanced_fit_mean_probability_is_half() {
        let obs = normal(0.0, 500, 3);
        let sim = normal(0.3, 500, 4);
        let fm = FeatureMap::parse_list("x,x2").unwrap();
        let design = build_design(&obs, &sim, &fm).unwrap();
        let fit = fit_logistic(&design, 0.0, 100, 1e-10).unwrap();
        let mean_p: f64 = design
            .features
            .iter()
            .map(|r| fit.probability(r).unwrap())
            .sum::<f64>()
            / design.len() as f64;
        assert!((mean_p - 0.5).abs() < 1e-6);
    }

    #[test]
    fn unpenalised_fit_is_affine_invariant() {
        let obs = normal(0.0, 400, 5);
        let sim = normal(0.5, 400, 6);
        let fm = FeatureMap::parse_list("x,x2").unwrap();
        let raw: Vec<Vec<f64>> = fm.rows(&obs).unwrap().into_iter().chain(fm.rows(&sim).unwrap()).collect();
        let labels: Vec<f64> = (0..800).map(|i| if i < 400 { 0.0 } else { 1.0 }).collect();
        let rescaled: Vec<Vec<f64>> = raw.iter().map(|r| vec![3.0 * r[0] - 7.0, 0.01 * r[1] + 2.0]).collect();
        let d1 = LabeledDesign::from_raw(raw, labels.clone()).unwrap();
        let d2 = LabeledDesign::from_raw(rescaled, labels).unwrap();
        let f1 = fit_logistic(&d1, 0.0, 100, 1e-12).unwrap();
        let f2 = fit_logistic(&d2, 0.0, 100, 1e-12).unwrap();
        for x in [-2.0, 0.0, 1.3] {
            let a = f1.log_odds(&d1.scaler.apply(&[x, x * x])).unwrap();
            let b = f2.log_odds(&d2.scaler.apply(&[3.0 * x - 7.0, 0.01 * x * x + 2.0])).unwrap();
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn every_point_gets_one_out_of_fold_value() {
        let obs = normal(0.0, 103, 7);
        let sim = normal(0.0, 97, 8);
        let fm = FeatureMap::parse_list("x,x2").unwrap();
        let cv = cross_validated_log_odds(&obs, &sim, &fm, 10, DEFAULT_RIDGE, &RngStream::new(1, 1)).unwrap();
        assert_eq!(cv.observed.len(), 103);
        assert_eq!(cv.simulated.len(), 97);
        assert!(cv.observed.iter().chain(&cv.simulated).all(|v| v.is_finite()));
    }

    #[test]
    fn stratified_folds_are_balanced() {
        let (o, s) = stratified_folds(1000, 1000, 10, &RngStream::new(3, 3));
        for f in 0..10 {
            assert_eq!(o.iter().filter(|&&g| g == f).count(), 100);
            assert_eq!(s.iter().filter(|&&g| g == f).count(), 100);
        }
    }

    #[test]
    fn degenerate_folds_rejected() {
        let obs = normal(0.0, 5, 9);
        let sim = normal(0.0, 50, 10);
        let fm = FeatureMap::parse_list("x").unwrap();
        let s = RngStream::new(0, 0);
        assert!(matches!(cv_log_odds(&obs, &sim, &fm, 10, 1e-6, &s), Err(Error::Usage(_))));
        assert!(matches!(cv_log_odds(&sim, &sim, &fm, 1, 1e-6, &s), Err(Error::Usage(_))));
    }

    #[test]
    fn indistinguishable_classes_average_zero() {
        let obs = normal(0.0, 1000, 11);
        let sim = normal(0.0, 1000, 12);
        let fm = FeatureMap::parse_list("x").unwrap();
        let lo = cv_log_odds(&obs, &sim, &fm, 10, DEFAULT_RIDGE, &RngStream::new(2, 2)).unwrap();
        let n = lo.len() as f64;
        let m = lo.iter().sum::<f64>() / n;
        let sd = (lo.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(m.abs() < 3.0 * sd / n.sqrt() + 1e-12, "mean {m}, sd {sd}");
    }

    #[test]
    fn fold_count_changes_are_within_noise() {
        let obs = normal(0.0, 1000, 13);
        let sim = normal(0.4, 1000, 14);
        let fm = FeatureMap::parse_list("x").unwrap();
        let s = RngStream::new(4, 4);
        let summary = |v: Vec<f64>| {
            let n = v.len() as f64;
            let m = v.iter().sum::<f64>() / n;
            let sd = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            (m, sd / n.sqrt())
        };
        let (m2, se2) = summary(cv_log_odds(&obs, &sim, &fm, 2, DEFAULT_RIDGE, &s).unwrap());
        let (m10, se10) = summary(cv_log_odds(&obs, &sim, &fm, 10, DEFAULT_RIDGE, &s).unwrap());
        assert_ne!(m2, m10);
        assert!((m2 - m10).abs() < 3.0 * (se2 * se2 + se10 * se10).sqrt());
    }
}
