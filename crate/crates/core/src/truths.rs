//! Benchmark data-generating processes with exact densities.
//!
//! Knowing the truth lets the analytical log ratio
//! `log p_M(x) - log p_T(x)` be evaluated next to the classifier estimate.
//! Regression truths draw covariates from `Uniform(-1, 1)` and return the
//! conditional density of the response.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conjugate::TemperedPosterior;
use crate::data::{Dataset, Point};
use crate::error::{usage, Result};
use crate::numerics::{ln_beta, ln_gamma, normal_cdf, normal_logpdf, student_t_logpdf, Dist, RngStream};
use crate::ratio::LogRatioEstimate;

pub const COVARIATE_LO: f64 = -1.0;
pub const COVARIATE_HI: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TruthSpec {
    Gaussian { mean: f64, sd: f64 },
    Laplace { loc: f64, scale: f64 },
    /// Count-probability convention: mean `r p / (1 - p)`.
    NegBinomial { r: f64, p: f64 },
    /// Mean `trials a / (a + b)`.
    BetaBinomial { a: f64, b: f64, trials: u64 },
    /// `y | x ~ slope x + scale T_df`.
    RegressionTNoise { slope: f64, df: f64, scale: f64 },
    /// `y | x ~ N(amplitude (Φ(steepness x) - 1/2), noise_sd²)`.
    RegressionSigmoid {
        amplitude: f64,
        steepness: f64,
        noise_sd: f64,
    },
}

impl TruthSpec {
    pub fn is_regression(&self) -> bool {
        matches!(
            self,
            TruthSpec::RegressionTNoise { .. } | TruthSpec::RegressionSigmoid { .. }
        )
    }

    /// The marginal (or conditional noise) distribution used for sampling.
    fn noise(&self) -> Dist {
        match *self {
            TruthSpec::Gaussian { mean, sd } => Dist::Normal { mean, sd },
            TruthSpec::Laplace { loc, scale } => Dist::Laplace { loc, scale },
            TruthSpec::NegBinomial { r, p } => Dist::NegBinomial { r, p },
            TruthSpec::BetaBinomial { a, b, trials } => Dist::BetaBinomial { a, b, trials },
            TruthSpec::RegressionTNoise { df, scale, .. } => Dist::StudentT {
                df,
                loc: 0.0,
                scale,
            },
            TruthSpec::RegressionSigmoid { noise_sd, .. } => Dist::Normal {
                mean: 0.0,
                sd: noise_sd,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise().validate()?;
        match *self {
            TruthSpec::RegressionTNoise { slope, .. } if !slope.is_finite() => {
                Err(usage("regression slope must be finite"))
            }
            TruthSpec::RegressionSigmoid {
                amplitude,
                steepness,
                ..
            } if !(amplitude.is_finite() && steepness.is_finite()) => {
                Err(usage("sigmoid amplitude and steepness must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// Conditional mean of the response for regression truths.
    pub fn mean_function(&self, x: f64) -> Option<f64> {
        match *self {
            TruthSpec::RegressionTNoise { slope, .. } => Some(slope * x),
            TruthSpec::RegressionSigmoid {
                amplitude,
                steepness,
                ..
            } => Some(amplitude * (normal_cdf(steepness * x) - 0.5)),
            _ => None,
        }
    }

    /// `n` i.i.d. draws. Regression truths draw all covariates first.
    pub fn sample(&self, stream: &RngStream, n: usize) -> Result<Dataset> {
        self.validate()?;
        let noise = self.noise();
        let mut rng = stream.rng();
        if self.is_regression() {
            let xs: Vec<f64> = (0..n)
                .map(|_| rng.random_range(COVARIATE_LO..COVARIATE_HI))
                .collect();
            let ys: Vec<f64> = xs
                .iter()
                .map(|&x| self.mean_function(x).expect("regression") + noise.draw(&mut rng))
                .collect();
            Dataset::pairs(&xs, &ys)
        } else {
            Ok(Dataset::scalars((0..n).map(|_| noise.draw(&mut rng)).collect()))
        }
    }

    /// Exact log density or mass; `-inf` outside the support.
    pub fn logpdf(&self, point: &Point) -> Result<f64> {
        match (*self, point) {
            (TruthSpec::Gaussian { mean, sd }, Point::Scalar(x)) => Ok(normal_logpdf(*x, mean, sd)),
            (TruthSpec::Laplace { loc, scale }, Point::Scalar(x)) => {
                Ok(-(x - loc).abs() / scale - (2.0 * scale).ln())
            }
            (TruthSpec::NegBinomial { r, p }, Point::Scalar(x)) => {
                if !is_count(*x) {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(ln_gamma(x + r)? - ln_gamma(r)? - ln_gamma(x + 1.0)?
                    + r * (-p).ln_1p()
                    + x * p.ln())
            }
            (TruthSpec::BetaBinomial { a, b, trials }, Point::Scalar(x)) => {
                let n = trials as f64;
                if !is_count(*x) || *x > n {
                    return Ok(f64::NEG_INFINITY);
                }
                // ln C(n, x) + ln B(x + a, n - x + b) - ln B(a, b)
                let ln_choose = ln_gamma(n + 1.0)? - ln_gamma(x + 1.0)? - ln_gamma(n - x + 1.0)?;
                Ok(ln_choose + ln_beta(x + a, n - x + b)? - ln_beta(a, b)?)
            }
            (TruthSpec::RegressionTNoise { slope, df, scale }, Point::Pair { x, y }) => {
                Ok(student_t_logpdf(*y, df, slope * x, scale))
            }
            (spec @ TruthSpec::RegressionSigmoid { noise_sd, .. }, Point::Pair { x, y }) => {
                Ok(normal_logpdf(*y, spec.mean_function(*x).expect("regression"), noise_sd))
            }
            (spec, p) => Err(usage(format!("point {p:?} does not match truth {spec:?}"))),
        }
    }
}

fn is_count(x: f64) -> bool {
    x.is_finite() && x >= 0.0 && x.fract() == 0.0
}

/// Draws from a truth; see [`TruthSpec::sample`].
pub fn truth_sample(spec: &TruthSpec, stream: &RngStream, n: usize) -> Result<Dataset> {
    spec.sample(stream, n)
}

pub fn truth_logpdf(spec: &TruthSpec, point: &Point) -> Result<f64> {
    spec.logpdf(point)
}

/// Exact per-point `log p_M(x) - log p_T(x)` over a validation set.
pub fn true_log_ratio(
    post: &TemperedPosterior,
    spec: &TruthSpec,
    validation: &Dataset,
) -> Result<LogRatioEstimate> {
    let values = validation
        .iter()
        .map(|p| Ok(post.predictive_logpdf(p)? - spec.logpdf(p)?))
        .collect::<Result<Vec<f64>>>()?;
    LogRatioEstimate::from_values(values)
}
