//! Sampling variability of the plug-in estimators without any shift.

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::ConditionalJoint;
use crate::error::{Error, Result};
use crate::estimators::empirical::counts;
use crate::estimators::Method;
use crate::rng::stream_rng;
use crate::samples::draw_counts;
use crate::stats::{mean_se, variance_se, MeanSe};
use crate::theory::{asymptotic_variances, AsymptoticVariances};

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSampleConfig {
    pub joint: ConditionalJoint,
    /// Covariate index at which the estimators are compared.
    pub x: usize,
    pub n_m2: u64,
    pub n_m1: u64,
    pub n_reps: usize,
    pub seed: u64,
    /// `(b1, b0)` for the rescaled proxy estimator `b1 * tau_B + b0`.
    pub linear_proxy_beta: Option<(f64, f64)>,
    /// Whether `E[Y2 | Y1, X]` is known to be affine, which makes the
    /// proxy variance meaningful.
    pub assert_linear_proxy: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiniteSampleRow {
    pub method: Method,
    /// `n * Var(tau_hat(x))` with `n = n_m2 + n_m1`.
    pub n_var: MeanSe,
    pub oracle: Option<f64>,
    pub pass: Option<bool>,
}

/// Bias of `b1 * tau_hat_B(x) + b0` against `tau(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProxyBias {
    pub empirical: MeanSe,
    pub population: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteSampleReport {
    pub n_total: u64,
    pub oracle: AsymptoticVariances,
    pub rows: Vec<FiniteSampleRow>,
    pub proxy_bias: Option<ProxyBias>,
}

impl FiniteSampleReport {
    pub fn get(&self, method: Method) -> Option<&FiniteSampleRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

pub fn run_finite_sample_experiment(cfg: &FiniteSampleConfig) -> Result<FiniteSampleReport> {
    if cfg.n_m2 < 1000 || cfg.n_m1 < 1000 {
        return Err(Error::InvalidParameter("both sample sizes must be at least 1000".into()));
    }
    if cfg.n_reps < 2 {
        return Err(Error::InvalidParameter("need at least two replications".into()));
    }
    let joint = &cfg.joint;
    let rho = cfg.n_m1 as f64 / cfg.n_m2 as f64;
    let oracle = asymptotic_variances(joint, cfg.x, rho, cfg.assert_linear_proxy)?;
    let alphabet = joint.alphabet_arc();
    let x = cfg.x;
    let draws: Vec<Result<[f64; 3]>> = (0..cfg.n_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(cfg.seed, r as u64);
            let c = draw_counts(joint, cfg.n_m2, cfg.n_m1, &mut rng);
            let a = counts::tau_a(alphabet, &c)?.get(x);
            let cc = counts::tau_c(alphabet, &c)?.table.get(x);
            let b = match cfg.linear_proxy_beta {
                Some((b1, b0)) => {
                    let raw = counts::tau_b(alphabet, &c, &crate::dist::ProxyScaling::identity())?.get(x);
                    b1 * raw + b0
                }
                None => f64::NAN,
            };
            Ok([a, b, cc])
        })
        .collect();
    let draws: Vec<[f64; 3]> = draws.into_iter().collect::<Result<_>>()?;
    let n_total = cfg.n_m2 + cfg.n_m1;
    let n = n_total as f64;
    let truth = joint.cond_mean_y2_given_x().get(x);
    let mut rows = Vec::new();
    for (i, method) in Method::ALL.into_iter().enumerate() {
        if method == Method::B && cfg.linear_proxy_beta.is_none() {
            continue;
        }
        let v = variance_se(&draws.iter().map(|d| d[i]).collect::<Vec<_>>());
        let n_var = MeanSe { mean: n * v.mean, se: n * v.se, n: v.n };
        let expected = oracle.get(method).ok();
        rows.push(FiniteSampleRow {
            method,
            n_var,
            oracle: expected,
            pass: expected.map(|e| (n_var.mean - e).abs() <= 4.0 * n_var.se),
        });
    }
    let proxy_bias = cfg.linear_proxy_beta.map(|(b1, b0)| {
        let errs: Vec<f64> = draws.iter().map(|d| d[1] - truth).collect();
        let m1 = joint.cond_mean_y1_given_x().get(x);
        ProxyBias { empirical: mean_se(&errs), population: b1 * m1 + b0 - truth }
    });
    Ok(FiniteSampleReport { n_total, oracle, rows, proxy_bias })
}
