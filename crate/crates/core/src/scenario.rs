//! Named benchmark scenarios and the end-to-end runner.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conjugate::Model;
use crate::discriminator::{FeatureMap, DEFAULT_MAX_ITER, DEFAULT_RIDGE, DEFAULT_TOL};
use crate::error::{usage, Error, Result};
use crate::numerics::RngStream;
use crate::ratio::ClassifierConfig;
use crate::tempering::{curve, CurveOptions, CurvePoint, StarDiagnostics, TemperingGrid};
use crate::truths::TruthSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    GaussGauss,
    GaussLaplace,
    PoissonNb,
    PoissonBetabinom,
    RegTnoise,
    RegSigmoid,
    Custom,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 7] = [
        ScenarioName::GaussGauss,
        ScenarioName::GaussLaplace,
        ScenarioName::PoissonNb,
        ScenarioName::PoissonBetabinom,
        ScenarioName::RegTnoise,
        ScenarioName::RegSigmoid,
        ScenarioName::Custom,
    ];

    pub const NAMED: [ScenarioName; 6] = [
        ScenarioName::GaussGauss,
        ScenarioName::GaussLaplace,
        ScenarioName::PoissonNb,
        ScenarioName::PoissonBetabinom,
        ScenarioName::RegTnoise,
        ScenarioName::RegSigmoid,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::GaussGauss => "gauss-gauss",
            ScenarioName::GaussLaplace => "gauss-laplace",
            ScenarioName::PoissonNb => "poisson-nb",
            ScenarioName::PoissonBetabinom => "poisson-betabinom",
            ScenarioName::RegTnoise => "reg-tnoise",
            ScenarioName::RegSigmoid => "reg-sigmoid",
            ScenarioName::Custom => "custom",
        }
    }

    /// Model, truth and discriminator features bound to a named scenario.
    /// `None` for `custom`.
    pub fn binding(&self) -> Option<Binding> {
        let gaussian = Model::gaussian(0.1, 0.0, 9.9);
        let poisson = Model::poisson_gamma(3.0, 0.05);
        let regression = Model::nig_regression(0.0, 1.0, 2.0, 2.0);
        let fm = |s: &str| FeatureMap::parse_list(s).expect("built-in feature list");
        let (model, truth, features) = match self {
            ScenarioName::GaussGauss => (gaussian, TruthSpec::Gaussian { mean: 0.0, sd: 3.01 }, fm("x,x2")),
            ScenarioName::GaussLaplace => (
                gaussian,
                TruthSpec::Laplace { loc: 0.0, scale: 2.13 },
                fm("x,x2,ln_abs_x"),
            ),
            ScenarioName::PoissonNb => (poisson, TruthSpec::NegBinomial { r: 63.0, p: 0.488 }, fm("x,x2,x3,x4")),
            // a > b: mean 52.2 and variance 30, below the Poisson variance
            ScenarioName::PoissonBetabinom => (
                poisson,
                TruthSpec::BetaBinomial {
                    a: 78.25,
                    b: 41.75,
                    trials: 80,
                },
                fm("x,x2,x3,x4"),
            ),
            ScenarioName::RegTnoise => (
                regression,
                TruthSpec::RegressionTNoise {
                    slope: 1.0,
                    df: 3.0,
                    scale: 1.22,
                },
                fm("abs_y,y2,ln_abs_y,yx"),
            ),
            ScenarioName::RegSigmoid => (
                regression,
                TruthSpec::RegressionSigmoid {
                    amplitude: 5.0,
                    steepness: 10.0,
                    noise_sd: 0.1,
                },
                fm("y,abs_y,y2,yx,abs_yx,yx2"),
            ),
            ScenarioName::Custom => return None,
        };
        Some(Binding {
            model,
            truth,
            features,
        })
    }

    /// One-line description of the bound parameters.
    pub fn describe(&self) -> String {
        match self.binding() {
            None => "model, truth and features from a config file".to_string(),
            Some(b) => format!(
                "model {} | truth {} | features {}",
                describe_model(&b.model),
                describe_truth(&b.truth),
                b.features
            ),
        }
    }
}

fn describe_model(m: &Model) -> String {
    match m {
        Model::Gaussian(g) => format!(
            "gaussian(sd={}, prior N({}, {}^2))",
            g.likelihood_sd, g.prior_mean, g.prior_sd
        ),
        Model::PoissonGamma(p) => format!("poisson(prior Gamma(shape={}, rate={}))", p.prior_shape, p.prior_rate),
        Model::NigRegression(r) => format!(
            "linear y=θx (prior θ0={}, n0={}, a0={}, b0={})",
            r.prior_coef, r.prior_precision_scale, r.prior_shape, r.prior_scale
        ),
    }
}

fn describe_truth(t: &TruthSpec) -> String {
    match t {
        TruthSpec::Gaussian { mean, sd } => format!("N({mean}, {sd}^2)"),
        TruthSpec::Laplace { loc, scale } => format!("Laplace({loc}, {scale})"),
        TruthSpec::NegBinomial { r, p } => format!("NB(r={r}, p={p})"),
        TruthSpec::BetaBinomial { a, b, trials } => format!("BetaBinomial(a={a}, b={b}, n={trials})"),
        TruthSpec::RegressionTNoise { slope, df, scale } => format!("y={slope}x + {scale}·t_{df}"),
        TruthSpec::RegressionSigmoid {
            amplitude,
            steepness,
            noise_sd,
        } => format!("y={amplitude}(Φ({steepness}x)-0.5) + N(0, {noise_sd}^2)"),
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(ScenarioName::as_str).collect();
                usage(format!("unknown scenario '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub model: Model,
    pub truth: TruthSpec,
    pub features: FeatureMap,
}

fn default_count() -> usize {
    1000
}
fn default_folds() -> usize {
    10
}
fn default_ridge() -> f64 {
    DEFAULT_RIDGE
}

/// Everything needed to reproduce a run. Deserializes from a flat TOML
/// file; `model` and `truth` are tables and only allowed for `custom`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    pub seed: u64,
    #[serde(default = "default_count")]
    pub n_update: usize,
    #[serde(default = "default_count")]
    pub n_validate: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_ridge")]
    pub ridge: f64,
    #[serde(default)]
    pub grid: TemperingGrid,
    #[serde(default)]
    pub full_curve: bool,
    #[serde(default)]
    pub reverse_kl: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TruthSpec>,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioName, seed: u64) -> Self {
        Self {
            scenario,
            seed,
            n_update: default_count(),
            n_validate: default_count(),
            folds: default_folds(),
            ridge: default_ridge(),
            grid: TemperingGrid::default(),
            full_curve: false,
            reverse_kl: false,
            features: None,
            model: None,
            truth: None,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Validates the config and resolves the model, truth and features.
    pub fn resolve(&self) -> Result<Binding> {
        if self.folds < 2 {
            return Err(usage(format!("folds must be at least 2, got {}", self.folds)));
        }
        let min = 2 * self.folds;
        if self.n_update < min || self.n_validate < min {
            return Err(usage(format!(
                "n-update and n-validate must be at least {min} (twice the fold count)"
            )));
        }
        if !(self.ridge.is_finite() && self.ridge >= 0.0) {
            return Err(usage(format!("ridge must be finite and non-negative, got {}", self.ridge)));
        }
        let binding = match self.scenario.binding() {
            Some(b) => {
                if self.model.is_some() || self.truth.is_some() || self.features.is_some() {
                    return Err(usage(format!(
                        "scenario {} has fixed model, truth and features; use 'custom' to change them",
                        self.scenario
                    )));
                }
                b
            }
            None => {
                let missing = |what: &str| usage(format!("custom scenario needs '{what}'"));
                Binding {
                    model: self.model.ok_or_else(|| missing("model"))?,
                    truth: self.truth.ok_or_else(|| missing("truth"))?,
                    features: self.features.clone().ok_or_else(|| missing("features"))?,
                }
            }
        };
        binding.model.validate()?;
        binding.truth.validate()?;
        if binding.model.is_regression() != binding.truth.is_regression() {
            return Err(usage("model and truth must both be regressions or both be unconditional"));
        }
        if binding.features.needs_response() && !binding.truth.is_regression() {
            return Err(usage(format!(
                "features '{}' use a response but the data has none",
                binding.features
            )));
        }
        Ok(binding)
    }

    pub fn classifier(&self, features: FeatureMap) -> ClassifierConfig {
        ClassifierConfig {
            features,
            folds: self.folds,
            ridge: self.ridge,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            n_sim: None,
        }
    }
}

/// Outcome of one scenario run. Contains no timing so that reruns with
/// the same config serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub version: String,
    pub config: ScenarioConfig,
    pub binding: Binding,
    pub star: StarDiagnostics,
    pub curve: Vec<CurvePoint>,
}

const DATA_STREAM: u64 = 1;
const PIPELINE_STREAM: u64 = 2;

/// Samples `n_update + n_validate` points from the truth, updates on the
/// first `n_update`, and runs the tempering curve and diagnostics.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    let binding = cfg.resolve()?;
    let root = RngStream::new(cfg.seed, 0);
    let data = binding
        .truth
        .sample(&root.fork(DATA_STREAM), cfg.n_update + cfg.n_validate)?;
    let (update, validation) = data.split_at(cfg.n_update);
    let options = CurveOptions {
        full_classifier: cfg.full_curve,
        reverse_kl: cfg.reverse_kl,
    };
    let c = curve(
        &binding.model,
        Some(&binding.truth),
        &update,
        &validation,
        &cfg.grid,
        &cfg.classifier(binding.features.clone()),
        options,
        &root.fork(PIPELINE_STREAM),
    )?;
    Ok(ScenarioResult {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        binding,
        star: c.star,
        curve: c.points,
    })
}
