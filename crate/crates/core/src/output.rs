//! Summary JSON and plot-ready curve CSV.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scenario::ScenarioResult;
use crate::tempering::CurvePoint;

pub const SUMMARY_FILE: &str = "summary.json";
pub const CURVE_FILE: &str = "curve.csv";
pub const CURVE_HEADER: &str = "t,log_predictive,logZ_approx_sum,logZ_true_sum,t_stat,p_value";

const SIG_DIGITS: usize = 10;

/// Formats with 10 significant digits, in the style of C's `%.10g`.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(format_sig).unwrap_or_default()
}

/// Grid rows plus the `t*` row, sorted by `t`. When `t*` coincides with a
/// grid value its diagnostics fill that row's empty fields.
pub fn curve_rows(result: &ScenarioResult) -> Vec<CurvePoint> {
    let s = &result.star;
    let star = CurvePoint {
        t: s.t,
        log_predictive: Some(s.log_predictive),
        logz_approx_sum: Some(s.logz_approx_sum),
        logz_true_sum: s.logz_true_sum,
        t_stat: s.t_stat,
        p_value: Some(s.p_value),
    };
    let mut rows = result.curve.clone();
    match rows.iter_mut().find(|r| r.t == star.t) {
        Some(r) => {
            r.log_predictive = r.log_predictive.or(star.log_predictive);
            r.logz_approx_sum = r.logz_approx_sum.or(star.logz_approx_sum);
            r.logz_true_sum = r.logz_true_sum.or(star.logz_true_sum);
            r.t_stat = r.t_stat.or(star.t_stat);
            r.p_value = r.p_value.or(star.p_value);
        }
        None => rows.push(star),
    }
    rows.sort_by(|a, b| a.t.total_cmp(&b.t));
    rows
}

pub fn curve_csv(result: &ScenarioResult) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for r in curve_rows(result) {
        let fields = [
            format_sig(r.t),
            cell(r.log_predictive),
            cell(r.logz_approx_sum),
            cell(r.logz_true_sum),
            cell(r.t_stat),
            cell(r.p_value),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn summary_json(result: &ScenarioResult) -> Result<String> {
    let mut s = serde_json::to_string_pretty(result).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `summary.json` and `curve.csv` into `dir`, creating it if needed.
/// Returns both paths.
pub fn emit_outputs(result: &ScenarioResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let summary = write(dir.join(SUMMARY_FILE), &summary_json(result)?)?;
    let curve = write(dir.join(CURVE_FILE), &curve_csv(result))?;
    Ok((summary, curve))
}
