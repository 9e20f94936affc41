//! Moment checks of a shift generator against the kappa variance law.

use rand::Rng;
use serde::Serialize;

use super::{CrossXMode, ShiftSpec};
use crate::dist::ConditionalJoint;
use crate::error::{Error, Result};
use crate::stats::{covariance_se, mean_se, variance_se};

/// Checks pass when the estimate is within this many standard errors.
pub const PASS_SE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// `E[S(a | x)]` for a singleton cell.
    Mean,
    /// `Var(S(A | x))` for a singleton or a two-cell union.
    Variance,
    /// `Cov(S(a | x), S(a' | x))` for two distinct cells.
    Covariance,
    /// `Cov(S(a | x), S(a | x'))` for one cell at two covariates.
    CrossCovariance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    pub statistic: Statistic,
    pub x: usize,
    /// Second covariate, for cross covariances.
    pub x2: Option<usize>,
    /// Flattened `(y1, y2)` cell indices of the event (or of the pair).
    pub cells: Vec<usize>,
    pub estimate: f64,
    pub se: f64,
    /// `None` where the generator implies no fixed value.
    pub expected: Option<f64>,
    pub pass: Option<bool>,
}

impl MomentCheck {
    fn new(statistic: Statistic, x: usize, x2: Option<usize>, cells: Vec<usize>, est: (f64, f64), expected: Option<f64>) -> Self {
        let (estimate, se) = est;
        let pass = expected.map(|e| (estimate - e).abs() <= PASS_SE * se);
        MomentCheck { statistic, x, x2, cells, estimate, se, expected, pass }
    }

    /// Standardised deviation from the expected value.
    pub fn z_score(&self) -> Option<f64> {
        self.expected.map(|e| (self.estimate - e) / self.se)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub spec: ShiftSpec,
    pub n_draws: usize,
    pub checks: Vec<MomentCheck>,
}

impl ValidationReport {
    fn passes(&self, f: impl Fn(&MomentCheck) -> bool) -> bool {
        self.checks.iter().filter(|c| f(c)).all(|c| c.pass != Some(false))
    }

    pub fn all_pass(&self) -> bool {
        self.passes(|_| true)
    }

    pub fn centering_passes(&self) -> bool {
        self.passes(|c| c.statistic == Statistic::Mean)
    }

    /// Variance and within-covariate covariance checks.
    pub fn variance_law_passes(&self) -> bool {
        self.passes(|c| matches!(c.statistic, Statistic::Variance | Statistic::Covariance))
    }

    pub fn of(&self, statistic: Statistic) -> impl Iterator<Item = &MomentCheck> + '_ {
        self.checks.iter().filter(move |c| c.statistic == statistic)
    }
}

/// Draws `n_draws` shifts from `joint` and compares their moments with
/// `Var(S(A)) = kappa p(A)(1 - p(A))` and `Cov(S(a), S(a')) = -kappa p(a) p(a')`.
/// Cross-covariate covariances are expected to vanish for independent rows
/// and are reported without a target for shared-seed draws.
pub fn validate_generator<R: Rng + ?Sized>(
    spec: &ShiftSpec,
    joint: &ConditionalJoint,
    n_draws: usize,
    rng: &mut R,
) -> Result<ValidationReport> {
    if n_draws < 1000 {
        return Err(Error::InvalidParameter(format!("validation needs at least 1000 draws, got {n_draws}")));
    }
    spec.validate()?;
    let n_cells = joint.cells().len();
    let k = joint.alphabet().cells_per_x();
    // column-major: one series per cell
    let mut series = vec![Vec::with_capacity(n_draws); n_cells];
    for _ in 0..n_draws {
        let (draw, _) = spec.sample(joint, rng)?;
        for (s, d) in series.iter_mut().zip(draw.delta()) {
            s.push(*d);
        }
    }
    let kappa = spec.kappa;
    let mut checks = Vec::new();
    for x in 0..joint.nx() {
        let p = joint.row(x);
        let at = |c: usize| &series[x * k + c];
        for c in 0..k {
            let m = mean_se(at(c));
            checks.push(MomentCheck::new(Statistic::Mean, x, None, vec![c], (m.mean, m.se), Some(0.0)));
            let v = variance_se(at(c));
            let law = kappa * p[c] * (1.0 - p[c]);
            checks.push(MomentCheck::new(Statistic::Variance, x, None, vec![c], (v.mean, v.se), Some(law)));
        }
        for c in 0..k {
            for c2 in c + 1..k {
                let union: Vec<f64> = at(c).iter().zip(at(c2)).map(|(a, b)| a + b).collect();
                let pa = p[c] + p[c2];
                let v = variance_se(&union);
                checks.push(MomentCheck::new(
                    Statistic::Variance,
                    x,
                    None,
                    vec![c, c2],
                    (v.mean, v.se),
                    Some(kappa * pa * (1.0 - pa)),
                ));
                let cv = covariance_se(at(c), at(c2));
                checks.push(MomentCheck::new(
                    Statistic::Covariance,
                    x,
                    None,
                    vec![c, c2],
                    (cv.mean, cv.se),
                    Some(-kappa * p[c] * p[c2]),
                ));
            }
        }
    }
    let cross_expected = match spec.cross_x_mode {
        CrossXMode::Independent => Some(0.0),
        CrossXMode::SharedSeed => None,
    };
    for x in 0..joint.nx() {
        for x2 in x + 1..joint.nx() {
            for c in 0..k {
                let cv = covariance_se(&series[x * k + c], &series[x2 * k + c]);
                checks.push(MomentCheck::new(
                    Statistic::CrossCovariance,
                    x,
                    Some(x2),
                    vec![c],
                    (cv.mean, cv.se),
                    cross_expected,
                ));
            }
        }
    }
    Ok(ValidationReport { spec: *spec, n_draws, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::reference_joint;
    use crate::rng::stream_rng;

    #[test]
    fn too_few_draws() {
        let r = validate_generator(&ShiftSpec::symmetric(0.2), &reference_joint(), 999, &mut stream_rng(0, 0));
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn symmetric_generator_passes() {
        let r = validate_generator(&ShiftSpec::symmetric(0.2), &reference_joint(), 20_000, &mut stream_rng(1, 0)).unwrap();
        assert!(r.all_pass(), "{:?}", r.checks.iter().filter(|c| c.pass == Some(false)).collect::<Vec<_>>());
        // 8 means, 8 singleton and 12 union variances, 12 covariances, 4 cross
        assert_eq!(r.checks.len(), 44);
    }

    #[test]
    fn paired_generator_is_centred_but_breaks_the_variance_law() {
        let r = validate_generator(&ShiftSpec::paired(0.1), &reference_joint(), 20_000, &mut stream_rng(2, 0)).unwrap();
        assert!(r.centering_passes());
        assert!(!r.variance_law_passes());
    }

    #[test]
    fn variance_scales_linearly_in_kappa() {
        let d0 = reference_joint();
        let var_at = |kappa: f64, seed: u64| {
            let r = validate_generator(&ShiftSpec::symmetric(kappa), &d0, 20_000, &mut stream_rng(seed, 0)).unwrap();
            let c = r.of(Statistic::Variance).next().unwrap().clone();
            (c.estimate, c.se)
        };
        let (hi, se_hi) = var_at(0.5, 3);
        let (lo, se_lo) = var_at(0.05, 4);
        let ratio = hi / lo;
        let se = ratio * ((se_hi / hi).powi(2) + (se_lo / lo).powi(2)).sqrt();
        assert!((ratio - 10.0).abs() <= 4.0 * se, "{ratio} +- {se}");
    }

    #[test]
    fn shared_seed_correlates_rows_and_keeps_per_row_moments() {
        let spec = ShiftSpec::symmetric(0.2).with_cross_x(CrossXMode::SharedSeed);
        let r = validate_generator(&spec, &reference_joint(), 20_000, &mut stream_rng(5, 0)).unwrap();
        assert!(r.all_pass());
        assert!(r.of(Statistic::CrossCovariance).all(|c| c.expected.is_none() && c.estimate.abs() > 4.0 * c.se));
    }
}
