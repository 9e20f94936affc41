//! Closed-form error predictions.
//!
//! Under two consecutive symmetric shifts of strengths `kappa_m2` (from
//! period -2 to -1) and `kappa_m1` (from -1 to 0), the mean squared errors of
//! the three predictors against the period-0 truth are, up to a remainder of
//! order `kappa_m1 * kappa_m2`:
//!
//! ```text
//! MSE_A = kappa_m2 * noise_x    + K1
//! MSE_B = proxy_bias + kappa_m2 * proxy_resid + K1
//! MSE_C = kappa_m2 * noise_full + K1,        K1 = kappa_m1 * noise_x
//! ```
//!
//! In the finite-sample regime without shift the plug-in estimators are
//! asymptotically normal with the variances in [`AsymptoticVariances`].

use serde::Serialize;

use crate::dist::{ConditionalJoint, NoiseTerms, ProxyScaling};
use crate::error::{Error, Result};
use crate::estimators::Method;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MseBreakdown {
    pub method: Method,
    /// Error from the shift between periods -2 and -1.
    pub term_shift_m2: f64,
    /// Error from the last shift, shared by all methods.
    pub term_k1: f64,
    /// Squared bias of the rescaled proxy; zero for A and C.
    pub term_proxy_bias: f64,
    /// Shift-inflated proxy residual; zero for A and C.
    pub term_proxy_resid: f64,
    /// Bound on the neglected `kappa_m1 * kappa_m2` remainder.
    pub cross_term_bound: f64,
}

impl MseBreakdown {
    pub fn total(&self) -> f64 {
        self.term_shift_m2 + self.term_k1 + self.term_proxy_bias + self.term_proxy_resid
    }

    /// Pass/fail tolerance for a Monte Carlo estimate with standard error `se`.
    pub fn tolerance(&self, se: f64) -> f64 {
        (4.0 * se).max(self.cross_term_bound)
    }
}

fn check_kappa(k: f64) -> Result<()> {
    // zero is allowed: it switches a stage off
    if (0.0..1.0).contains(&k) {
        Ok(())
    } else {
        Err(Error::KappaOutOfRange(k))
    }
}

/// Breakdowns for A, B (with `scaling`) and C, covariates weighted by the
/// period -2 marginal.
pub fn theorem1_predict(
    joint_m2: &ConditionalJoint,
    scaling: &ProxyScaling,
    kappa_m2: f64,
    kappa_m1: f64,
) -> Result<[MseBreakdown; 3]> {
    theorem1_predict_weighted(joint_m2, scaling, kappa_m2, kappa_m1, joint_m2.px())
}

/// [`theorem1_predict`] with explicit covariate weights.
pub fn theorem1_predict_weighted(
    joint_m2: &ConditionalJoint,
    scaling: &ProxyScaling,
    kappa_m2: f64,
    kappa_m1: f64,
    weights: &[f64],
) -> Result<[MseBreakdown; 3]> {
    check_kappa(kappa_m2)?;
    check_kappa(kappa_m1)?;
    if weights.len() != joint_m2.nx() {
        return Err(Error::DimensionMismatch(format!("{} weights for {} covariates", weights.len(), joint_m2.nx())));
    }
    let NoiseTerms { noise_full, noise_x, proxy_bias, proxy_resid } = joint_m2.noise_terms_weighted(scaling, weights);
    let k1 = kappa_m1 * noise_x;
    let bound = kappa_m1 * kappa_m2 * noise_x;
    let base = |method| MseBreakdown {
        method,
        term_shift_m2: 0.0,
        term_k1: k1,
        term_proxy_bias: 0.0,
        term_proxy_resid: 0.0,
        cross_term_bound: bound,
    };
    Ok([
        MseBreakdown { term_shift_m2: kappa_m2 * noise_x, ..base(Method::A) },
        MseBreakdown { term_proxy_bias: proxy_bias, term_proxy_resid: kappa_m2 * proxy_resid, ..base(Method::B) },
        MseBreakdown { term_shift_m2: kappa_m2 * noise_full, ..base(Method::C) },
    ])
}

/// Limiting variances of `sqrt(n) (tau_hat(x) - tau(x))`, `n = n_m2 + n_m1`,
/// with `n_m1 / n_m2 -> rho` and no shift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticVariances {
    pub rho: f64,
    pub at_x: String,
    pub sigma2_a: f64,
    /// Present only when the caller asserted an affine `E[Y2 | Y1, X]`.
    pub sigma2_b: Option<f64>,
    pub sigma2_c: f64,
}

impl AsymptoticVariances {
    pub fn sigma2_b(&self) -> Result<f64> {
        self.sigma2_b.ok_or(Error::LinearProxyNotAsserted)
    }

    pub fn get(&self, method: Method) -> Result<f64> {
        match method {
            Method::A => Ok(self.sigma2_a),
            Method::B => self.sigma2_b(),
            Method::C => Ok(self.sigma2_c),
        }
    }
}

/// `linear_proxy` asserts `E[Y2 | Y1, X] = b1 Y1 + b0`; see [`linear_proxy_beta`].
pub fn asymptotic_variances(joint: &ConditionalJoint, x: usize, rho: f64, linear_proxy: bool) -> Result<AsymptoticVariances> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if x >= joint.nx() {
        return Err(Error::DimensionMismatch(format!("covariate index {x} out of range")));
    }
    let p = joint.px()[x];
    if p <= 0.0 {
        return Err(Error::ZeroMassCovariate(joint.alphabet().x_labels()[x].clone()));
    }
    let t = joint.noise_terms_at(x, &ProxyScaling::identity());
    let var_q = (t.noise_x - t.noise_full).max(0.0);
    let resid = t.noise_full;
    let first = (1.0 + rho) / rho * var_q / p;
    Ok(AsymptoticVariances {
        rho,
        at_x: joint.alphabet().x_labels()[x].clone(),
        sigma2_a: (1.0 + rho) * t.noise_x / p,
        sigma2_b: linear_proxy.then_some(first),
        sigma2_c: first + (1.0 + rho) * resid / p,
    })
}

/// `(b1, b0)` when `E[Y2 | Y1, X] = b1 Y1 + b0` holds on every cell with
/// positive mass (to 1e-12), else `None`.
pub fn linear_proxy_beta(joint: &ConditionalJoint) -> Option<(f64, f64)> {
    let a = joint.alphabet();
    let q = joint.cond_mean_y2_given_y1_x();
    let points: Vec<(f64, f64)> = (0..joint.nx())
        .flat_map(|x| (0..a.n1()).filter_map(move |i| (joint.px()[x] > 0.0).then_some((x, i))))
        .filter_map(|(x, i)| q.get(x, i).map(|v| (a.y1_value(i), v)))
        .collect();
    let (x0, y0) = *points.first()?;
    let other = points.iter().find(|(v, _)| (v - x0).abs() > 0.0);
    let (b1, b0) = match other {
        Some(&(x1, y1)) => {
            let b1 = (y1 - y0) / (x1 - x0);
            (b1, y0 - b1 * x0)
        }
        None => (0.0, y0),
    };
    points.iter().all(|(u, v)| (b1 * u + b0 - v).abs() <= 1e-12).then_some((b1, b0))
}
