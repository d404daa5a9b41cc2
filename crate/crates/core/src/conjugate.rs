//! Tempered conjugate updates and their closed-form posterior predictives.
//!
//! A tempered update raises the likelihood to a power `t` in `[0, 1]`:
//! `p_t(θ | X) ∝ p(X | θ)^t p(θ)`. For exponential families this only
//! rescales the sufficient statistics by `t`, so every family below keeps
//! its conjugate form.

use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Point};
use crate::error::{domain, usage, Error, Result};
use crate::numerics::{ln_gamma, normal_logpdf, student_t_logpdf, Dist, RngStream};

/// Gaussian likelihood with known sd and a Gaussian prior on the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianKnownVarModel {
    pub likelihood_sd: f64,
    pub prior_mean: f64,
    pub prior_sd: f64,
}

/// Poisson likelihood with a Gamma(shape, rate) prior on the rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonGammaModel {
    pub prior_shape: f64,
    pub prior_rate: f64,
}

/// `y = θ x + ε`, `ε ~ N(0, σ²)`, with a Normal-Inverse-Gamma prior:
/// `θ | σ² ~ N(θ0, σ² / n0)` and `σ² ~ InvGamma(a0, b0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NigRegressionModel {
    pub prior_coef: f64,
    pub prior_precision_scale: f64,
    pub prior_shape: f64,
    pub prior_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Model {
    Gaussian(GaussianKnownVarModel),
    PoissonGamma(PoissonGammaModel),
    NigRegression(NigRegressionModel),
}

impl Model {
    pub fn gaussian(likelihood_sd: f64, prior_mean: f64, prior_sd: f64) -> Self {
        Model::Gaussian(GaussianKnownVarModel {
            likelihood_sd,
            prior_mean,
            prior_sd,
        })
    }

    pub fn poisson_gamma(prior_shape: f64, prior_rate: f64) -> Self {
        Model::PoissonGamma(PoissonGammaModel {
            prior_shape,
            prior_rate,
        })
    }

    pub fn nig_regression(coef: f64, precision_scale: f64, shape: f64, scale: f64) -> Self {
        Model::NigRegression(NigRegressionModel {
            prior_coef: coef,
            prior_precision_scale: precision_scale,
            prior_shape: shape,
            prior_scale: scale,
        })
    }

    pub fn is_regression(&self) -> bool {
        matches!(self, Model::NigRegression(_))
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(domain(format!("{name} must be finite and positive, got {v}")))
            }
        };
        match self {
            Model::Gaussian(m) => {
                check("likelihood sd", m.likelihood_sd)?;
                check("prior sd", m.prior_sd)?;
                if !m.prior_mean.is_finite() {
                    return Err(domain("prior mean must be finite"));
                }
            }
            Model::PoissonGamma(m) => {
                check("prior shape", m.prior_shape)?;
                check("prior rate", m.prior_rate)?;
            }
            Model::NigRegression(m) => {
                check("prior precision scale", m.prior_precision_scale)?;
                check("prior shape", m.prior_shape)?;
                check("prior scale", m.prior_scale)?;
                if !m.prior_coef.is_finite() {
                    return Err(domain("prior coefficient must be finite"));
                }
            }
        }
        Ok(())
    }
}

/// Sufficient statistics of an update partition.
///
/// For scalar data `x` is the value; for regression `x` is the covariate
/// and `y` the response.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub n: usize,
    pub sum_x: f64,
    pub sum_xx: f64,
    pub sum_xy: f64,
    pub sum_y: f64,
    pub sum_yy: f64,
}

impl SufficientStats {
    pub fn from_dataset(data: &Dataset) -> Self {
        let mut s = SufficientStats::default();
        for p in data {
            s.n += 1;
            let x = p.x();
            s.sum_x += x;
            s.sum_xx += x * x;
            if let Some(y) = p.y() {
                s.sum_xy += x * y;
                s.sum_y += y;
                s.sum_yy += y * y;
            }
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.sum_x, self.sum_xx, self.sum_xy, self.sum_y, self.sum_yy];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(domain("sufficient statistics must be finite"));
        }
        if self.sum_xx < 0.0 || self.sum_yy < 0.0 {
            return Err(domain("sums of squares must be non-negative"));
        }
        if self.n > 0 {
            let n = self.n as f64;
            let slack = 1e-9 * self.sum_xx.max(1.0);
            if self.sum_xx + slack < self.sum_x * self.sum_x / n {
                return Err(domain("sum of squares is smaller than (sum)^2 / n"));
            }
        } else if self.sum_x != 0.0 || self.sum_xx != 0.0 || self.sum_yy != 0.0 {
            return Err(domain("empty statistics must have zero sums"));
        }
        Ok(())
    }
}

/// Hyperparameters of a tempered posterior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PosteriorParams {
    /// `μ ~ N(mean, 1 / precision)`, data noise sd `likelihood_sd`.
    Gaussian {
        mean: f64,
        precision: f64,
        likelihood_sd: f64,
    },
    /// `λ ~ Gamma(shape, rate)`.
    Gamma { shape: f64, rate: f64 },
    /// `θ | σ² ~ N(coef, σ² / precision)`, `σ² ~ InvGamma(shape, scale)`.
    NormalInverseGamma {
        coef: f64,
        precision: f64,
        shape: f64,
        scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperedPosterior {
    pub t: f64,
    pub params: PosteriorParams,
}

/// Closed-form tempered update.
pub fn temper_update(model: &Model, stats: &SufficientStats, t: f64) -> Result<TemperedPosterior> {
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!("tempering must lie in [0, 1], got {t}")));
    }
    model.validate()?;
    stats.validate()?;
    if t == 0.0 {
        return Ok(TemperedPosterior {
            t,
            params: prior_params(model),
        });
    }
    let n = stats.n as f64;
    let params = match *model {
        Model::Gaussian(m) => {
            let prior_prec = 1.0 / (m.prior_sd * m.prior_sd);
            let noise_prec = 1.0 / (m.likelihood_sd * m.likelihood_sd);
            let precision = prior_prec + t * n * noise_prec;
            let mean = (m.prior_mean * prior_prec + t * stats.sum_x * noise_prec) / precision;
            PosteriorParams::Gaussian {
                mean,
                precision,
                likelihood_sd: m.likelihood_sd,
            }
        }
        Model::PoissonGamma(m) => PosteriorParams::Gamma {
            shape: m.prior_shape + t * stats.sum_x,
            rate: m.prior_rate + t * n,
        },
        Model::NigRegression(m) => {
            let n0 = m.prior_precision_scale;
            let precision = n0 + t * stats.sum_xx;
            let coef = (n0 * m.prior_coef + t * stats.sum_xy) / precision;
            let shape = m.prior_shape + 0.5 * t * n;
            let scale = m.prior_scale
                + 0.5 * (t * stats.sum_yy + n0 * m.prior_coef * m.prior_coef
                    - precision * coef * coef);
            if !(scale > 0.0) || !scale.is_finite() {
                return Err(Error::Internal(format!(
                    "posterior inverse-gamma scale is not positive: {scale}"
                )));
            }
            PosteriorParams::NormalInverseGamma {
                coef,
                precision,
                shape,
                scale,
            }
        }
    };
    Ok(TemperedPosterior { t, params })
}

fn prior_params(model: &Model) -> PosteriorParams {
    match *model {
        Model::Gaussian(m) => PosteriorParams::Gaussian {
            mean: m.prior_mean,
            precision: 1.0 / (m.prior_sd * m.prior_sd),
            likelihood_sd: m.likelihood_sd,
        },
        Model::PoissonGamma(m) => PosteriorParams::Gamma {
            shape: m.prior_shape,
            rate: m.prior_rate,
        },
        Model::NigRegression(m) => PosteriorParams::NormalInverseGamma {
            coef: m.prior_coef,
            precision: m.prior_precision_scale,
            shape: m.prior_shape,
            scale: m.prior_scale,
        },
    }
}

fn count_value(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 || x.fract() != 0.0 {
        return Err(domain(format!("expected a non-negative integer count, got {x}")));
    }
    Ok(x)
}

/// Negative binomial log mass with `r` successes and success probability
/// `rate / (1 + rate)`; the Gamma(r, rate)-Poisson mixture.
fn neg_binomial_logpmf(x: f64, r: f64, rate: f64) -> f64 {
    ln_gamma(x + r).expect("positive") - ln_gamma(r).expect("positive")
        - ln_gamma(x + 1.0).expect("positive")
        + r * (rate / (1.0 + rate)).ln()
        - x * rate.ln_1p()
}

impl TemperedPosterior {
    /// Log density (or mass) of the posterior predictive at `point`.
    pub fn predictive_logpdf(&self, point: &Point) -> Result<f64> {
        match (self.params, point) {
            (
                PosteriorParams::Gaussian {
                    mean,
                    precision,
                    likelihood_sd,
                },
                Point::Scalar(x),
            ) => {
                let sd = (likelihood_sd * likelihood_sd + 1.0 / precision).sqrt();
                Ok(normal_logpdf(*x, mean, sd))
            }
            (PosteriorParams::Gamma { shape, rate }, Point::Scalar(x)) => {
                let x = count_value(*x)?;
                Ok(neg_binomial_logpmf(x, shape, rate))
            }
            (
                PosteriorParams::NormalInverseGamma {
                    coef,
                    precision,
                    shape,
                    scale,
                },
                Point::Pair { x, y },
            ) => {
                let s2 = scale / shape * (1.0 + x * x / precision);
                Ok(student_t_logpdf(*y, 2.0 * shape, coef * x, s2.sqrt()))
            }
            (params, p) => Err(usage(format!(
                "point {p:?} does not match posterior family {}",
                family_name(&params)
            ))),
        }
    }

    /// Ancestral draws from the predictive: a parameter from the posterior,
    /// then one datapoint from the likelihood, independently per point.
    pub fn predictive_sample(
        &self,
        stream: &RngStream,
        n: usize,
        covariates: Option<&[f64]>,
    ) -> Result<Dataset> {
        let mut rng = stream.rng();
        match self.params {
            PosteriorParams::Gaussian {
                mean,
                precision,
                likelihood_sd,
            } => {
                let mu_dist = Normal::new(mean, precision.sqrt().recip())
                    .map_err(|e| domain(e.to_string()))?;
                let values = (0..n)
                    .map(|_| {
                        let mu = mu_dist.sample(&mut rng);
                        let z: f64 = rand_distr::StandardNormal.sample(&mut rng);
                        mu + likelihood_sd * z
                    })
                    .collect();
                Ok(Dataset::scalars(values))
            }
            PosteriorParams::Gamma { shape, rate } => {
                let lambda_dist =
                    Gamma::new(shape, 1.0 / rate).map_err(|e| domain(e.to_string()))?;
                let values = (0..n)
                    .map(|_| {
                        let lambda = lambda_dist.sample(&mut rng);
                        Dist::Poisson { rate: lambda.max(f64::MIN_POSITIVE) }.draw(&mut rng)
                    })
                    .collect();
                Ok(Dataset::scalars(values))
            }
            PosteriorParams::NormalInverseGamma {
                coef,
                precision,
                shape,
                scale,
            } => {
                let xs = covariates
                    .ok_or_else(|| usage("regression predictive sampling needs covariates"))?;
                if xs.len() != n {
                    return Err(usage(format!(
                        "expected {n} covariates for predictive sampling, got {}",
                        xs.len()
                    )));
                }
                let inv_var = Gamma::new(shape, 1.0 / scale).map_err(|e| domain(e.to_string()))?;
                let ys: Vec<f64> = xs
                    .iter()
                    .map(|&x| {
                        let var = 1.0 / inv_var.sample(&mut rng);
                        let z1: f64 = rand_distr::StandardNormal.sample(&mut rng);
                        let theta = coef + (var / precision).sqrt() * z1;
                        let z2: f64 = rand_distr::StandardNormal.sample(&mut rng);
                        theta * x + var.sqrt() * z2
                    })
                    .collect();
                Dataset::pairs(xs, &ys)
            }
        }
    }

    /// Joint log density of the posterior at a parameter point: `[μ]`,
    /// `[λ]` or `[θ, σ²]` depending on the family.
    pub fn posterior_log_density(&self, theta: &[f64]) -> Result<f64> {
        match (self.params, theta) {
            (PosteriorParams::Gaussian { mean, precision, .. }, [mu]) => {
                Ok(normal_logpdf(*mu, mean, precision.sqrt().recip()))
            }
            (PosteriorParams::Gamma { shape, rate }, [lambda]) => {
                if *lambda <= 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(shape * rate.ln() - ln_gamma(shape)? + (shape - 1.0) * lambda.ln()
                    - rate * lambda)
            }
            (
                PosteriorParams::NormalInverseGamma {
                    coef,
                    precision,
                    shape,
                    scale,
                },
                [coef_at, var],
            ) => {
                if *var <= 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                let ln_inv_gamma = shape * scale.ln() - ln_gamma(shape)?
                    - (shape + 1.0) * var.ln()
                    - scale / var;
                Ok(normal_logpdf(*coef_at, coef, (var / precision).sqrt()) + ln_inv_gamma)
            }
            (params, _) => Err(usage(format!(
                "parameter vector of length {} does not match family {}",
                theta.len(),
                family_name(&params)
            ))),
        }
    }

    /// Predictive variance of a scalar point; `None` for regression.
    pub fn predictive_variance(&self) -> Option<f64> {
        match self.params {
            PosteriorParams::Gaussian {
                precision,
                likelihood_sd,
                ..
            } => Some(likelihood_sd * likelihood_sd + 1.0 / precision),
            PosteriorParams::Gamma { shape, rate } => {
                let mean = shape / rate;
                Some(mean * (1.0 + 1.0 / rate))
            }
            PosteriorParams::NormalInverseGamma { .. } => None,
        }
    }
}

fn family_name(params: &PosteriorParams) -> &'static str {
    match params {
        PosteriorParams::Gaussian { .. } => "gaussian",
        PosteriorParams::Gamma { .. } => "gamma",
        PosteriorParams::NormalInverseGamma { .. } => "normal-inverse-gamma",
    }
}

/// `log p_t(X_v | X_u)` as a sum of one-point predictive log densities
/// under the posterior tempered on `X_u`.
pub fn log_tempered_predictive(
    model: &Model,
    update: &Dataset,
    validation: &Dataset,
    t: f64,
) -> Result<f64> {
    if update.is_empty() || validation.is_empty() {
        return Err(usage("update and validation partitions must be non-empty"));
    }
    let post = temper_update(model, &SufficientStats::from_dataset(update), t)?;
    log_predictive_score(&post, validation)
}

pub(crate) fn log_predictive_score(post: &TemperedPosterior, data: &Dataset) -> Result<f64> {
    data.iter().map(|p| post.predictive_logpdf(p)).sum()
}
