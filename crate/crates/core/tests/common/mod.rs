//! Independent numerical oracles shared by the integration tests.
//!
//! Nothing here calls into the crate's densities: unnormalized log
//! posteriors are written out from the likelihood and prior, and
//! normalizers come from adaptive Simpson quadrature.

#![allow(dead_code)]

use carmen::{Dataset, Model, Point};

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search.
pub fn golden_max(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

/// Adaptive Simpson over `[a, b]`, started from 64 panels.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (x0, x1) = (a + h * i as f64, a + h * (i + 1) as f64);
            let (f0, f1, fm) = (f(x0), f(x1), f(0.5 * (x0 + x1)));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson_rec(f, x0, x1, f0, fm, f1, whole, eps / panels as f64, 40)
        })
        .sum()
}

/// `ln ∫ exp(g(x)) dx` for a unimodal log integrand on `[lo, hi]`.
///
/// The mode is found by golden search; the range then grows from the mode
/// until `g` has dropped by 50 nats (or the bracket ends) on each side.
pub fn log_normalizer(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, rel_eps: f64) -> f64 {
    let (mode, gmax) = golden_max(g, lo, hi, 1e-12 * (hi - lo).max(1e-300) + 1e-13);
    let reach = |dir: f64| {
        let mut step = 1e-6 * mode.abs().max(1e-3);
        loop {
            let x = mode + dir * step;
            if x <= lo || x >= hi {
                return if dir < 0.0 { lo } else { hi };
            }
            if g(x) < gmax - 50.0 {
                return x;
            }
            step *= 2.0;
        }
    };
    let (a, b) = (reach(-1.0), reach(1.0));
    let h = |x: f64| (g(x) - gmax).exp();
    let scale = (b - a).max(1e-300);
    let left = integrate(&h, a, mode, rel_eps * scale);
    let right = integrate(&h, mode, b, rel_eps * scale);
    gmax + (left + right).ln()
}

/// Unnormalized tempered log posterior `t · ln p(X | θ) + ln p(θ)` up to
/// additive constants, written directly from the model definitions.
pub fn unnormalized_log_posterior(model: &Model, data: &Dataset, t: f64, theta: &[f64]) -> f64 {
    match (model, theta) {
        (Model::Gaussian(m), [mu]) => {
            let s2 = m.likelihood_sd * m.likelihood_sd;
            let ll: f64 = data.iter().map(|p| -(p.x() - mu).powi(2) / (2.0 * s2)).sum();
            t * ll - (mu - m.prior_mean).powi(2) / (2.0 * m.prior_sd * m.prior_sd)
        }
        (Model::PoissonGamma(m), [lambda]) => {
            if *lambda <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let ll: f64 = data.iter().map(|p| p.x() * lambda.ln() - lambda).sum();
            t * ll + (m.prior_shape - 1.0) * lambda.ln() - m.prior_rate * lambda
        }
        (Model::NigRegression(m), [coef, var]) => {
            if *var <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let ll: f64 = data
                .iter()
                .map(|p| match p {
                    Point::Pair { x, y } => -0.5 * var.ln() - (y - coef * x).powi(2) / (2.0 * var),
                    Point::Scalar(_) => panic!("regression needs pairs"),
                })
                .sum();
            let prior_coef = -0.5 * (var / m.prior_precision_scale).ln()
                - m.prior_precision_scale * (coef - m.prior_coef).powi(2) / (2.0 * var);
            let prior_var = -(m.prior_shape + 1.0) * var.ln() - m.prior_scale / var;
            t * ll + prior_coef + prior_var
        }
        _ => panic!("parameter vector does not match model"),
    }
}

pub const COEF_BRACKET: (f64, f64) = (-200.0, 200.0);
pub const LN_VAR_BRACKET: (f64, f64) = (-40.0, 40.0);

/// `ln ∫ exp(h(θ)) dθ` over the parameter space of `model`.
///
/// Rate and variance are integrated on the log scale, with the Jacobian
/// folded into the integrand.
pub fn quadrature_log_integral(model: &Model, h: &dyn Fn(&[f64]) -> f64) -> f64 {
    let eps = 1e-11;
    match model {
        Model::Gaussian(_) => log_normalizer(&|mu| h(&[mu]), -1e3, 1e3, eps),
        Model::PoissonGamma(_) => log_normalizer(&|u: f64| h(&[u.exp()]) + u, -60.0, 20.0, eps),
        Model::NigRegression(_) => {
            let inner = |u: f64| {
                log_normalizer(&|c| h(&[c, u.exp()]), COEF_BRACKET.0, COEF_BRACKET.1, eps) + u
            };
            log_normalizer(&inner, LN_VAR_BRACKET.0, LN_VAR_BRACKET.1, 1e-10)
        }
    }
}

/// Quadrature log normalizer of the tempered posterior.
pub fn quadrature_log_normalizer(model: &Model, data: &Dataset, t: f64) -> f64 {
    quadrature_log_integral(model, &|th| unnormalized_log_posterior(model, data, t, th))
}

/// Normalized one-point likelihood `ln p(point | θ)`.
pub fn point_log_likelihood(model: &Model, point: &Point, theta: &[f64]) -> f64 {
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    match (model, theta, point) {
        (Model::Gaussian(m), [mu], Point::Scalar(x)) => {
            let s = m.likelihood_sd;
            -0.5 * ln_2pi - s.ln() - (x - mu).powi(2) / (2.0 * s * s)
        }
        (Model::PoissonGamma(_), [lambda], Point::Scalar(k)) => {
            k * lambda.ln() - lambda - ln_factorial(*k as u64)
        }
        (Model::NigRegression(_), [coef, var], Point::Pair { x, y }) => {
            -0.5 * ln_2pi - 0.5 * var.ln() - (y - coef * x).powi(2) / (2.0 * var)
        }
        _ => panic!("point does not match model"),
    }
}

/// Posterior predictive log density by quadrature:
/// `ln ∫ p(point | θ) p_t(θ | X) dθ`.
pub fn quadrature_predictive_logpdf(model: &Model, data: &Dataset, t: f64, point: &Point) -> f64 {
    let joint = quadrature_log_integral(model, &|th| {
        unnormalized_log_posterior(model, data, t, th) + point_log_likelihood(model, point, th)
    });
    joint - quadrature_log_normalizer(model, data, t)
}

/// Posterior mode located numerically (nested for the regression model).
pub fn posterior_mode(model: &Model, data: &Dataset, t: f64) -> Vec<f64> {
    match model {
        Model::Gaussian(_) => {
            let g = |mu: f64| unnormalized_log_posterior(model, data, t, &[mu]);
            vec![golden_max(&g, -1e3, 1e3, 1e-10).0]
        }
        Model::PoissonGamma(_) => {
            let g = |u: f64| unnormalized_log_posterior(model, data, t, &[u.exp()]);
            vec![golden_max(&g, -60.0, 20.0, 1e-12).0.exp()]
        }
        Model::NigRegression(_) => {
            let best_coef = |u: f64| {
                let g = |c: f64| unnormalized_log_posterior(model, data, t, &[c, u.exp()]);
                golden_max(&g, COEF_BRACKET.0, COEF_BRACKET.1, 1e-10)
            };
            let (u, _) = golden_max(&|u| best_coef(u).1, LN_VAR_BRACKET.0, LN_VAR_BRACKET.1, 1e-10);
            vec![best_coef(u).0, u.exp()]
        }
    }
}

/// `ln Γ(n + 1)` for integer `n` by direct summation.
pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Sample standard deviation.
pub fn sd(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Width `1/sqrt(-f'')` of a log density at its mode, by central differences.
pub fn curvature_width(f: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    let mut h = 1e-4 * x.abs().max(1e-2);
    let mut w = 0.0;
    for _ in 0..2 {
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        w = 1.0 / (-d2).sqrt();
        h = 0.1 * w;
    }
    w
}

/// Five parameter points spread around the posterior mode.
pub fn probe_points(model: &Model, data: &Dataset, t: f64) -> Vec<Vec<f64>> {
    let mode = posterior_mode(model, data, t);
    match model {
        Model::Gaussian(_) | Model::PoissonGamma(_) => {
            let g = |v: f64| unnormalized_log_posterior(model, data, t, &[v]);
            let w = curvature_width(&g, mode[0]);
            let positive = matches!(model, Model::PoissonGamma(_));
            [-2.0, -1.0, 0.0, 0.5, 1.5]
                .iter()
                .map(|k| match positive {
                    // stay inside the support when the prior is wide
                    true => vec![mode[0] * f64::exp(k * w / mode[0])],
                    false => vec![mode[0] + k * w],
                })
                .collect()
        }
        Model::NigRegression(_) => {
            let g = |c: f64| unnormalized_log_posterior(model, data, t, &[c, mode[1]]);
            let w = curvature_width(&g, mode[0]);
            [(0.0, 0.0), (-1.0, 0.5), (1.0, -0.5), (2.0, 1.0), (-1.5, -1.0)]
                .iter()
                .map(|(kc, kv)| vec![mode[0] + kc * w, mode[1] * f64::exp(0.25 * kv)])
                .collect()
        }
    }
}

/// Largest `|p_crate / p_oracle - 1|` over the probe points.
pub fn posterior_density_error(model: &Model, data: &Dataset, t: f64) -> f64 {
    let post = carmen::conjugate::temper_update(model, &carmen::SufficientStats::from_dataset(data), t)
        .expect("valid update");
    let log_z = quadrature_log_normalizer(model, data, t);
    let points = probe_points(model, data, t);
    assert_eq!(points.len(), 5, "probe points must stay in the support");
    points
        .iter()
        .map(|th| {
            let oracle = unnormalized_log_posterior(model, data, t, th) - log_z;
            let ours = post.posterior_log_density(th).expect("density");
            (ours - oracle).exp_m1().abs()
        })
        .fold(0.0, f64::max)
}
