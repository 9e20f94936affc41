//! Dirichlet draws computed in log space.
//!
//! Small concentrations (`alpha * p` well below 1) make plain Gamma draws
//! underflow to zero; working with `ln G` and a soft-max keeps every row on
//! the simplex. The comonotone variant feeds the same uniforms to the Gamma
//! quantile function of every row, which correlates rows while leaving each
//! row's marginal law an exact Dirichlet.

use rand::Rng;
use rand::distr::Open01;
use rand_distr::{Distribution, Gamma};
use statrs::distribution::{ContinuousCDF, Gamma as GammaCdf};

/// `ln G` for `G ~ Gamma(shape, 1)`.
pub(crate) fn log_gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        Gamma::new(shape, 1.0).expect("positive shape").sample(rng).ln()
    } else {
        // G(shape) = G(shape + 1) * U^(1 / shape)
        let g = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
        let u: f64 = Open01.sample(rng);
        g.ln() + u.ln() / shape
    }
}

/// `ln G` from given uniforms through the Gamma quantile function.
fn log_gamma_quantile(shape: f64, u1: f64, u2: f64) -> f64 {
    if shape >= 1.0 {
        GammaCdf::new(shape, 1.0).expect("positive shape").inverse_cdf(u1).ln()
    } else {
        let g = GammaCdf::new(shape + 1.0, 1.0).expect("positive shape").inverse_cdf(u1);
        g.ln() + u2.ln() / shape
    }
}

fn softmax(logs: &[f64]) -> Vec<f64> {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= s);
    out
}

/// One draw from `Dirichlet(alphas)`; every alpha must be positive.
pub(crate) fn dirichlet<R: Rng + ?Sized>(alphas: &[f64], rng: &mut R) -> Vec<f64> {
    let logs: Vec<f64> = alphas.iter().map(|&a| log_gamma_draw(a, rng)).collect();
    softmax(&logs)
}

/// One draw per row, all rows driven by a shared pair of uniforms per cell.
pub(crate) fn comonotone_dirichlet<R: Rng + ?Sized>(rows: &[Vec<f64>], rng: &mut R) -> Vec<Vec<f64>> {
    let k = rows.first().map_or(0, Vec::len);
    let uniforms: Vec<(f64, f64)> = (0..k).map(|_| (Open01.sample(rng), Open01.sample(rng))).collect();
    rows.iter()
        .map(|alphas| {
            let logs: Vec<f64> =
                alphas.iter().zip(&uniforms).map(|(&a, &(u1, u2))| log_gamma_quantile(a, u1, u2)).collect();
            softmax(&logs)
        })
        .collect()
}
