//! Small Monte Carlo summaries: means, variances and their standard errors.

use serde::Serialize;

/// Sample mean with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    let se = if n >= 2 { (variance(xs) / n as f64).sqrt() } else { 0.0 };
    MeanSe { mean: mean(xs), se, n }
}

/// Sample variance with a delta-method standard error,
/// `sqrt((m4 - s^4) / n)` where `m4` is the fourth central moment.
pub fn variance_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    let m = mean(xs);
    let v = variance(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n as f64;
    let se = ((m4 - v * v).max(0.0) / n as f64).sqrt();
    MeanSe { mean: v, se, n }
}

/// Sample covariance with the standard error of the mean of centred products.
pub fn covariance_se(xs: &[f64], ys: &[f64]) -> MeanSe {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let (mx, my) = (mean(xs), mean(ys));
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let mut s = mean_se(&prods);
    s.mean *= n as f64 / (n as f64 - 1.0);
    s
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, se_a, se_b)`.
pub fn simple_regression(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    let s2 = rss / (n - 2.0);
    let se_b = (s2 / sxx).sqrt();
    let se_a = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    (a, b, se_a, se_b)
}
