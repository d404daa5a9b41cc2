use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution, Gamma, Normal, Poisson, StudentT};
use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use crate::error::{domain, Result};

/// Parametric distributions that can be sampled reproducibly.
///
/// Negative binomial follows the count-probability convention: `p` is the
/// per-trial probability attached to the counted outcome, so the mean is
/// `r p / (1 - p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Dist {
    Normal { mean: f64, sd: f64 },
    Laplace { loc: f64, scale: f64 },
    Gamma { shape: f64, rate: f64 },
    Poisson { rate: f64 },
    NegBinomial { r: f64, p: f64 },
    Beta { a: f64, b: f64 },
    BetaBinomial { a: f64, b: f64, trials: u64 },
    StudentT { df: f64, loc: f64, scale: f64 },
    Uniform { lo: f64, hi: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and positive, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite, got {v}")))
    }
}

impl Dist {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Dist::Normal { mean, sd } => {
                finite("mean", mean)?;
                positive("sd", sd)
            }
            Dist::Laplace { loc, scale } => {
                finite("loc", loc)?;
                positive("scale", scale)
            }
            Dist::Gamma { shape, rate } => {
                positive("shape", shape)?;
                positive("rate", rate)
            }
            Dist::Poisson { rate } => positive("rate", rate),
            Dist::NegBinomial { r, p } => {
                positive("r", r)?;
                if p > 0.0 && p < 1.0 {
                    Ok(())
                } else {
                    Err(domain(format!("p must lie in (0, 1), got {p}")))
                }
            }
            Dist::Beta { a, b } => {
                positive("a", a)?;
                positive("b", b)
            }
            Dist::BetaBinomial { a, b, trials } => {
                positive("a", a)?;
                positive("b", b)?;
                if trials >= 1 {
                    Ok(())
                } else {
                    Err(domain("beta-binomial needs at least one trial"))
                }
            }
            Dist::StudentT { df, loc, scale } => {
                positive("df", df)?;
                finite("loc", loc)?;
                positive("scale", scale)
            }
            Dist::Uniform { lo, hi } => {
                finite("lo", lo)?;
                finite("hi", hi)?;
                if lo < hi {
                    Ok(())
                } else {
                    Err(domain(format!("uniform bounds must satisfy lo < hi, got [{lo}, {hi}]")))
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Dist::Normal { mean, .. } => mean,
            Dist::Laplace { loc, .. } => loc,
            Dist::Gamma { shape, rate } => shape / rate,
            Dist::Poisson { rate } => rate,
            Dist::NegBinomial { r, p } => r * p / (1.0 - p),
            Dist::Beta { a, b } => a / (a + b),
            Dist::BetaBinomial { a, b, trials } => trials as f64 * a / (a + b),
            Dist::StudentT { df, loc, .. } => {
                if df > 1.0 {
                    loc
                } else {
                    f64::NAN
                }
            }
            Dist::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Dist::Normal { sd, .. } => sd * sd,
            Dist::Laplace { scale, .. } => 2.0 * scale * scale,
            Dist::Gamma { shape, rate } => shape / (rate * rate),
            Dist::Poisson { rate } => rate,
            Dist::NegBinomial { r, p } => r * p / ((1.0 - p) * (1.0 - p)),
            Dist::Beta { a, b } => a * b / ((a + b).powi(2) * (a + b + 1.0)),
            Dist::BetaBinomial { a, b, trials } => {
                let n = trials as f64;
                n * a * b * (a + b + n) / ((a + b).powi(2) * (a + b + 1.0))
            }
            Dist::StudentT { df, scale, .. } => {
                if df > 2.0 {
                    scale * scale * df / (df - 2.0)
                } else {
                    f64::INFINITY
                }
            }
            Dist::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
        }
    }

    /// One draw. Parameters must already be valid.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Normal { mean, sd } => Normal::new(mean, sd).expect("validated").sample(rng),
            Dist::Laplace { loc, scale } => {
                // inverse CDF on u in (-1/2, 1/2)
                let u: f64 = rng.random::<f64>() - 0.5;
                let tail = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
                loc - scale * u.signum() * tail.ln()
            }
            Dist::Gamma { shape, rate } => {
                Gamma::new(shape, 1.0 / rate).expect("validated").sample(rng)
            }
            Dist::Poisson { rate } => poisson_draw(rate, rng),
            Dist::NegBinomial { r, p } => {
                let lambda = Gamma::new(r, p / (1.0 - p)).expect("validated").sample(rng);
                poisson_draw(lambda, rng)
            }
            Dist::Beta { a, b } => Beta::new(a, b).expect("validated").sample(rng),
            Dist::BetaBinomial { a, b, trials } => {
                let p = Beta::new(a, b).expect("validated").sample(rng);
                Binomial::new(trials, p).expect("p in [0, 1]").sample(rng) as f64
            }
            Dist::StudentT { df, loc, scale } => {
                loc + scale * StudentT::new(df).expect("validated").sample(rng)
            }
            Dist::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }

    /// `n` i.i.d. draws from the start of `stream`.
    pub fn sample(&self, stream: &RngStream, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let mut rng = stream.rng();
        Ok((0..n).map(|_| self.draw(&mut rng)).collect())
    }
}

pub(crate) fn poisson_draw<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    if rate <= 0.0 {
        return 0.0;
    }
    Poisson::new(rate).expect("positive rate").sample(rng)
}
