//! One-tailed tests of `E[log Z] = 0` against `E[log Z] < 0`.
//!
//! A small p-value is evidence that the model is misspecified. A large one
//! only says the classifier found nothing to separate.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::numerics::{normal_cdf, student_t_cdf};
use crate::ratio::LogRatioEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    TTest,
    Wilcoxon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MisspecTestResult {
    /// t statistic, or the normal-approximation z score for Wilcoxon.
    pub statistic: f64,
    /// `n - 1` for the t-test; number of non-zero values for Wilcoxon.
    pub df: usize,
    pub p_value: f64,
    pub method: TestMethod,
}

/// One-sample t-test on the per-point log ratios, lower tail.
pub fn t_test_logz(est: &LogRatioEstimate) -> Result<MisspecTestResult> {
    let n = est.per_point.len();
    if n < 2 {
        return Err(usage(format!("t-test needs at least 2 values, got {n}")));
    }
    let df = n - 1;
    let mean = est.per_point.iter().sum::<f64>() / n as f64;
    let sd = (est.per_point.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / df as f64).sqrt();
    let result = |statistic: f64, p_value: f64| MisspecTestResult {
        statistic,
        df,
        p_value,
        method: TestMethod::TTest,
    };
    if mean.is_nan() || sd.is_nan() {
        // -inf values (points outside the model support) make the mean -inf
        if est.per_point.contains(&f64::NEG_INFINITY) {
            return Ok(result(f64::NEG_INFINITY, 0.0));
        }
        return Err(usage("log-ratio values must not be NaN"));
    }
    if mean == f64::NEG_INFINITY {
        return Ok(result(f64::NEG_INFINITY, 0.0));
    }
    if sd == 0.0 {
        return Ok(if mean == 0.0 {
            result(0.0, 1.0)
        } else if mean < 0.0 {
            result(f64::NEG_INFINITY, 0.0)
        } else {
            result(f64::INFINITY, 1.0)
        });
    }
    let t = mean / (sd / (n as f64).sqrt());
    Ok(result(t, student_t_cdf(t, df as f64)?))
}

/// Wilcoxon signed-rank test of median zero against median below zero.
///
/// Zeros are dropped, tied magnitudes share their average rank, and the
/// p-value uses the tie-corrected normal approximation.
pub fn wilcoxon_signed_rank(est: &LogRatioEstimate) -> Result<MisspecTestResult> {
    if est.per_point.len() < 10 {
        return Err(usage(format!(
            "signed-rank test needs at least 10 values, got {}",
            est.per_point.len()
        )));
    }
    if est.per_point.iter().any(|v| v.is_nan()) {
        return Err(usage("log-ratio values must not be NaN"));
    }
    let mut nonzero: Vec<f64> = est.per_point.iter().copied().filter(|v| *v != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return Ok(MisspecTestResult {
            statistic: 0.0,
            df: 0,
            p_value: 1.0,
            method: TestMethod::Wilcoxon,
        });
    }
    nonzero.sort_by(|a, b| a.abs().total_cmp(&b.abs()));

    let mut w_plus = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && nonzero[j].abs() == nonzero[i].abs() {
            j += 1;
        }
        // ranks i+1 ..= j share their average
        let rank = 0.5 * ((i + 1) + j) as f64;
        let size = (j - i) as f64;
        tie_term += size * size * size - size;
        w_plus += rank * nonzero[i..j].iter().filter(|v| **v > 0.0).count() as f64;
        i = j;
    }
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let z = if var > 0.0 { (w_plus - mean) / var.sqrt() } else { 0.0 };
    Ok(MisspecTestResult {
        statistic: z,
        df: n,
        p_value: normal_cdf(z),
        method: TestMethod::Wilcoxon,
    })
}
