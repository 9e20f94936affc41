//! Random distribution shifts between consecutive periods.
//!
//! A shift draw `S(y1, y2 | x)` is the signed difference between the next
//! period's conditional table and the current one. Every generator here emits
//! draws that sum to zero within each covariate row and keep all shifted
//! cells inside `[0, 1]`.
//!
//! Generators:
//!
//! * [`sample_symmetric_shift`]: each row is redrawn from a Dirichlet with
//!   concentration `alpha * p`, `alpha = (1 - kappa) / kappa`. For any event
//!   `A`, `P'(A) ~ Beta(alpha p(A), alpha (1 - p(A)))`, so
//!   `Var(S(A)) = kappa p(A) (1 - p(A))` for all events at once.
//! * [`sample_asymmetric_shift`]: only the Y1 marginal is redrawn; the law of
//!   Y2 given `(Y1, X)` is carried over unchanged.
//! * [`sample_paired_perturbation`]: a random direction scaled to stay
//!   feasible in both signs, emitted with a fair random sign. Centred, but
//!   does not follow the kappa variance law.
//!
//! `CrossXMode::SharedSeed` couples the rows of different covariates: the
//! Dirichlet generators use comonotone Gamma draws, the paired generator
//! reuses one direction and sign.

mod dirichlet;
mod permute;
mod validate;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dist::{Alphabet, ConditionalJoint};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

pub use permute::permute_covariates;
pub use validate::{validate_generator, MomentCheck, Statistic, ValidationReport};

/// Zero-sum tolerance for emitted draws.
pub const ZERO_SUM_TOLERANCE: f64 = 1e-10;

/// A realised shift `S(y1, y2 | x)`, laid out like [`ConditionalJoint::cells`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftDraw {
    alphabet: Arc<Alphabet>,
    delta: Vec<f64>,
}

impl ShiftDraw {
    pub fn between(before: &ConditionalJoint, after: &ConditionalJoint) -> Self {
        let delta = after.cells().iter().zip(before.cells()).map(|(a, b)| a - b).collect();
        ShiftDraw { alphabet: before.alphabet_arc().clone(), delta }
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let k = self.alphabet.cells_per_x();
        &self.delta[x * k..(x + 1) * k]
    }

    pub fn max_abs(&self) -> f64 {
        self.delta.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Sum of squared cell shifts, a scalar size of the draw.
    pub fn squared_norm(&self) -> f64 {
        self.delta.iter().map(|d| d * d).sum()
    }

    pub fn is_null(&self) -> bool {
        self.delta.iter().all(|d| *d == 0.0)
    }

    /// Checks zero row sums and that `base + delta` stays in `[0, 1]`
    /// (up to one rounding step).
    pub fn satisfies_constraints(&self, base: &ConditionalJoint) -> bool {
        let k = self.alphabet.cells_per_x();
        let sums_ok = self.delta.chunks(k).all(|r| r.iter().sum::<f64>().abs() <= ZERO_SUM_TOLERANCE);
        let range_ok = base
            .cells()
            .iter()
            .zip(&self.delta)
            .all(|(p, d)| (-f64::EPSILON..=1.0 + f64::EPSILON).contains(&(p + d)));
        sums_ok && range_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    SymmetricDirichlet,
    AsymmetricMarginal,
    PairedPerturbation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossXMode {
    #[default]
    Independent,
    SharedSeed,
}

/// Generator choice and strength.
///
/// `kappa` is the shift strength for the symmetric generator, the marginal
/// scale for the asymmetric one (both in `(0, 1)`), and the maximal step for
/// the paired perturbation (any value `>= 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub kind: ShiftKind,
    pub kappa: f64,
    #[serde(default)]
    pub cross_x_mode: CrossXMode,
    /// Paired perturbation only: perturb the Y1 marginal and keep the
    /// conditional law of Y2 given `(Y1, X)`.
    #[serde(default)]
    pub y1_marginal_only: bool,
}

impl ShiftSpec {
    pub fn symmetric(kappa: f64) -> Self {
        ShiftSpec { kind: ShiftKind::SymmetricDirichlet, kappa, cross_x_mode: CrossXMode::Independent, y1_marginal_only: false }
    }

    pub fn asymmetric(scale: f64) -> Self {
        ShiftSpec { kind: ShiftKind::AsymmetricMarginal, kappa: scale, cross_x_mode: CrossXMode::Independent, y1_marginal_only: true }
    }

    pub fn paired(magnitude: f64) -> Self {
        ShiftSpec { kind: ShiftKind::PairedPerturbation, kappa: magnitude, cross_x_mode: CrossXMode::Independent, y1_marginal_only: false }
    }

    pub fn with_cross_x(mut self, mode: CrossXMode) -> Self {
        self.cross_x_mode = mode;
        self
    }

    pub fn on_y1_marginal(mut self) -> Self {
        self.y1_marginal_only = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ShiftKind::SymmetricDirichlet => check_kappa(self.kappa),
            ShiftKind::AsymmetricMarginal => check_scale(self.kappa),
            ShiftKind::PairedPerturbation => {
                if self.kappa >= 0.0 && self.kappa.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("paired magnitude must be >= 0, got {}", self.kappa)))
                }
            }
        }
    }

    /// Whether draws leave `P(y2 | y1, x)` unchanged.
    pub fn preserves_y2_conditional(&self) -> bool {
        match self.kind {
            ShiftKind::SymmetricDirichlet => false,
            ShiftKind::AsymmetricMarginal => true,
            ShiftKind::PairedPerturbation => self.y1_marginal_only,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, joint: &ConditionalJoint, rng: &mut R) -> Result<(ShiftDraw, ConditionalJoint)> {
        self.validate()?;
        match self.kind {
            ShiftKind::SymmetricDirichlet => symmetric_shift(joint, self.kappa, self.cross_x_mode, rng),
            ShiftKind::AsymmetricMarginal => asymmetric_shift(joint, self.kappa, self.cross_x_mode, rng),
            ShiftKind::PairedPerturbation => {
                paired_perturbation(joint, self.kappa, self.cross_x_mode, self.y1_marginal_only, None, rng)
            }
        }
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa < 1.0 {
        Ok(())
    } else {
        Err(Error::KappaOutOfRange(kappa))
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale < 1.0 {
        Ok(())
    } else {
        Err(Error::ScaleOutOfRange(scale))
    }
}

fn finish(joint: &ConditionalJoint, cells: Vec<f64>) -> (ShiftDraw, ConditionalJoint) {
    let next = joint.with_cells(cells);
    (ShiftDraw::between(joint, &next), next)
}

/// Redraws each row from `Dirichlet(alpha * row)`, `alpha = (1 - kappa) / kappa`.
pub fn sample_symmetric_shift<R: Rng + ?Sized>(
    joint: &ConditionalJoint,
    kappa: f64,
    rng: &mut R,
) -> Result<(ShiftDraw, ConditionalJoint)> {
    symmetric_shift(joint, kappa, CrossXMode::Independent, rng)
}

fn symmetric_shift<R: Rng + ?Sized>(
    joint: &ConditionalJoint,
    kappa: f64,
    mode: CrossXMode,
    rng: &mut R,
) -> Result<(ShiftDraw, ConditionalJoint)> {
    check_kappa(kappa)?;
    let a = joint.alphabet();
    let alpha = (1.0 - kappa) / kappa;
    let mut rows = Vec::with_capacity(joint.nx());
    for x in 0..joint.nx() {
        let row = joint.row(x);
        if let Some(c) = row.iter().position(|&p| p <= 0.0) {
            return Err(Error::ZeroCellInBase {
                x: a.x_labels()[x].clone(),
                y1: a.y1_levels()[c / a.n2()].label.clone(),
                y2: a.y2_levels()[c % a.n2()].label.clone(),
            });
        }
        rows.push(row.iter().map(|p| alpha * p).collect::<Vec<_>>());
    }
    let drawn = match mode {
        CrossXMode::Independent => rows.iter().map(|r| dirichlet::dirichlet(r, rng)).collect::<Vec<_>>(),
        CrossXMode::SharedSeed => dirichlet::comonotone_dirichlet(&rows, rng),
    };
    Ok(finish(joint, drawn.concat()))
}

/// Redraws `P(y1 | x)` from `Dirichlet(alpha * P(y1 | x))`,
/// `alpha = (1 - scale) / scale`, keeping `P(y2 | y1, x)`.
pub fn sample_asymmetric_shift<R: Rng + ?Sized>(
    joint: &ConditionalJoint,
    scale: f64,
    rng: &mut R,
) -> Result<(ShiftDraw, ConditionalJoint)> {
    asymmetric_shift(joint, scale, CrossXMode::Independent, rng)
}

fn marginals_checked(joint: &ConditionalJoint) -> Result<Vec<Vec<f64>>> {
    let a = joint.alphabet();
    (0..joint.nx())
        .map(|x| {
            let m = joint.y1_marginal(x);
            match m.iter().position(|&v| v <= 0.0) {
                Some(i) => Err(Error::ZeroMarginalCell { x: a.x_labels()[x].clone(), y1: a.y1_levels()[i].label.clone() }),
                None => Ok(m),
            }
        })
        .collect()
}

/// Rebuilds cells from new Y1 marginals and the old conditionals of Y2.
fn recombine(joint: &ConditionalJoint, old: &[Vec<f64>], new: &[Vec<f64>]) -> Vec<f64> {
    let n2 = joint.alphabet().n2();
    let mut cells = Vec::with_capacity(joint.cells().len());
    for x in 0..joint.nx() {
        for (y1, chunk) in joint.row(x).chunks(n2).enumerate() {
            let (m_old, m_new) = (old[x][y1], new[x][y1]);
            if m_old > 0.0 {
                cells.extend(chunk.iter().map(|p| m_new * (p / m_old)));
            } else {
                cells.extend(std::iter::repeat_n(0.0, n2));
            }
        }
    }
    cells
}

fn asymmetric_shift<R: Rng + ?Sized>(
    joint: &ConditionalJoint,
    scale: f64,
    mode: CrossXMode,
    rng: &mut R,
) -> Result<(ShiftDraw, ConditionalJoint)> {
    check_scale(scale)?;
    let marginals = marginals_checked(joint)?;
    let alpha = (1.0 - scale) / scale;
    let rows: Vec<Vec<f64>> = marginals.iter().map(|m| m.iter().map(|p| alpha * p).collect()).collect();
    let drawn = match mode {
        CrossXMode::Independent => rows.iter().map(|r| dirichlet::dirichlet(r, rng)).collect::<Vec<_>>(),
        CrossXMode::SharedSeed => dirichlet::comonotone_dirichlet(&rows, rng),
    };
    Ok(finish(joint, recombine(joint, &marginals, &drawn)))
}

/// Two-sided feasible perturbation with a fair random sign per covariate.
pub fn sample_paired_perturbation<R: Rng + ?Sized>(
    joint: &ConditionalJoint,
    magnitude: f64,
    rng: &mut R,
) -> Result<(ShiftDraw, ConditionalJoint)> {
    paired_perturbation(joint, magnitude, CrossXMode::Independent, false, None, rng)
}

/// [`sample_paired_perturbation`] with the sign forced to `+1` or `-1` for
/// every covariate. Two calls with equal RNG states and opposite signs
/// return exact negatives.
pub fn sample_paired_perturbation_signed<R: Rng + ?Sized>(
    joint: &ConditionalJoint,
    magnitude: f64,
    positive: bool,
    rng: &mut R,
) -> Result<(ShiftDraw, ConditionalJoint)> {
    paired_perturbation(joint, magnitude, CrossXMode::Independent, false, Some(positive), rng)
}

/// Paired perturbation applied to `P(y1 | x)` only.
pub fn sample_paired_marginal_perturbation<R: Rng + ?Sized>(
    joint: &ConditionalJoint,
    magnitude: f64,
    rng: &mut R,
) -> Result<(ShiftDraw, ConditionalJoint)> {
    paired_perturbation(joint, magnitude, CrossXMode::Independent, true, None, rng)
}

/// Centred unit-max-norm direction and the signed feasible step for `p`.
fn paired_step<R: Rng + ?Sized>(p: &[f64], magnitude: f64, forced: Option<bool>, rng: &mut R) -> Vec<f64> {
    let mut d: Vec<f64> = p.iter().map(|_| StandardNormal.sample(rng)).collect();
    let positive = forced.unwrap_or_else(|| rng.random::<bool>());
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    d.iter_mut().for_each(|v| *v -= mean);
    let norm = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm == 0.0 {
        return vec![0.0; p.len()];
    }
    d.iter_mut().for_each(|v| *v /= norm);
    let mut eps = magnitude;
    for (&pi, &di) in p.iter().zip(&d) {
        if di != 0.0 {
            // shrink by a relative 1e-12 so rounding cannot leave [0, 1]
            eps = eps.min(pi.min(1.0 - pi).max(0.0) / di.abs() * (1.0 - 1e-12));
        }
    }
    let sign = if positive { 1.0 } else { -1.0 };
    d.iter().map(|di| sign * eps * di).collect()
}

fn paired_perturbation<R: Rng + ?Sized>(
    joint: &ConditionalJoint,
    magnitude: f64,
    mode: CrossXMode,
    marginal_only: bool,
    forced: Option<bool>,
    rng: &mut R,
) -> Result<(ShiftDraw, ConditionalJoint)> {
    if !(magnitude >= 0.0) || !magnitude.is_finite() {
        return Err(Error::InvalidParameter(format!("paired magnitude must be >= 0, got {magnitude}")));
    }
    let bases: Vec<Vec<f64>> = if marginal_only {
        (0..joint.nx()).map(|x| joint.y1_marginal(x)).collect()
    } else {
        (0..joint.nx()).map(|x| joint.row(x).to_vec()).collect()
    };
    let shared_seed: Option<u64> = match mode {
        CrossXMode::SharedSeed => Some(rng.random()),
        CrossXMode::Independent => None,
    };
    let mut steps = Vec::with_capacity(bases.len());
    for base in &bases {
        steps.push(match shared_seed {
            Some(s) => paired_step(base, magnitude, forced, &mut StreamRng::seed_from_u64(s)),
            None => paired_step(base, magnitude, forced, rng),
        });
    }
    if marginal_only {
        let moved: Vec<Vec<f64>> =
            bases.iter().zip(&steps).map(|(b, s)| b.iter().zip(s).map(|(p, d)| p + d).collect()).collect();
        return Ok(finish(joint, recombine(joint, &bases, &moved)));
    }
    // the step itself is the draw, so opposite signs give exact negatives
    let delta = steps.concat();
    let cells = joint.cells().iter().zip(&delta).map(|(p, d)| p + d).collect();
    let next = joint.with_cells(cells);
    Ok((ShiftDraw { alphabet: joint.alphabet_arc().clone(), delta }, next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::reference_joint;
    use crate::rng::stream_rng;
    use crate::stats::{mean_se, variance};

    #[test]
    fn symmetric_draws_respect_constraints() {
        let d0 = reference_joint();
        let mut rng = stream_rng(11, 0);
        for _ in 0..500 {
            let (s, next) = sample_symmetric_shift(&d0, 0.3, &mut rng).unwrap();
            assert!(s.satisfies_constraints(&d0));
            assert_eq!(ShiftDraw::between(&d0, &next), s);
        }
    }

    #[test]
    fn symmetric_rejects_zero_cell_and_bad_kappa() {
        let d0 = reference_joint();
        let mut rng = stream_rng(0, 0);
        assert!(matches!(sample_symmetric_shift(&d0, 0.0, &mut rng), Err(Error::KappaOutOfRange(_))));
        assert!(matches!(sample_symmetric_shift(&d0, 1.0, &mut rng), Err(Error::KappaOutOfRange(_))));
        let sparse = ConditionalJoint::new(
            Alphabet::integer(1, 2, 2).unwrap(),
            vec![1.0],
            vec![vec![0.5, 0.0, 0.0, 0.5]],
        )
        .unwrap();
        let err = sample_symmetric_shift(&sparse, 0.2, &mut rng).unwrap_err();
        assert_eq!(err, Error::ZeroCellInBase { x: "0".into(), y1: "0".into(), y2: "1".into() });
    }

    #[test]
    fn near_zero_kappa_is_near_null() {
        let d0 = reference_joint();
        let mut rng = stream_rng(12, 0);
        let worst = (0..100).map(|_| sample_symmetric_shift(&d0, 1e-6, &mut rng).unwrap().0.max_abs()).fold(0.0, f64::max);
        assert!(worst < 0.01, "{worst}");
    }

    #[test]
    fn asymmetric_keeps_y2_conditional() {
        let d0 = reference_joint();
        let q0 = d0.cond_mean_y2_given_y1_x();
        let mut rng = stream_rng(13, 0);
        for _ in 0..200 {
            let (s, next) = sample_asymmetric_shift(&d0, 0.3, &mut rng).unwrap();
            assert!(s.satisfies_constraints(&d0));
            let q1 = next.cond_mean_y2_given_y1_x();
            for x in 0..2 {
                for y1 in 0..2 {
                    assert!((q0.get(x, y1).unwrap() - q1.get(x, y1).unwrap()).abs() < 1e-12);
                }
                // P(y2 | y1, x) cellwise
                let (m0, m1) = (d0.y1_marginal(x), next.y1_marginal(x));
                for c in 0..4 {
                    let lhs = d0.row(x)[c] / m0[c / 2];
                    let rhs = next.row(x)[c] / m1[c / 2];
                    assert!((lhs - rhs).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn asymmetric_rejects_zero_marginal() {
        let j = ConditionalJoint::new(
            Alphabet::integer(1, 2, 2).unwrap(),
            vec![1.0],
            vec![vec![0.5, 0.5, 0.0, 0.0]],
        )
        .unwrap();
        let mut rng = stream_rng(0, 0);
        assert!(matches!(sample_asymmetric_shift(&j, 0.3, &mut rng), Err(Error::ZeroMarginalCell { .. })));
        assert!(matches!(sample_asymmetric_shift(&reference_joint(), 1.5, &mut rng), Err(Error::ScaleOutOfRange(_))));
    }

    #[test]
    fn asymmetric_tiny_scale_is_near_identity() {
        let d0 = reference_joint();
        let mut rng = stream_rng(14, 0);
        let (_, next) = sample_asymmetric_shift(&d0, 1e-9, &mut rng).unwrap();
        assert!(next.max_abs_diff(&d0) < 1e-3);
    }

    #[test]
    fn paired_signs_are_exact_negatives() {
        let d0 = reference_joint();
        let (plus, _) = sample_paired_perturbation_signed(&d0, 0.2, true, &mut stream_rng(5, 0)).unwrap();
        let (minus, _) = sample_paired_perturbation_signed(&d0, 0.2, false, &mut stream_rng(5, 0)).unwrap();
        assert!(!plus.is_null());
        for (a, b) in plus.delta().iter().zip(minus.delta()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn paired_point_mass_row_is_null() {
        let j = ConditionalJoint::new(
            Alphabet::integer(1, 2, 2).unwrap(),
            vec![1.0],
            vec![vec![0.0, 0.0, 0.0, 1.0]],
        )
        .unwrap();
        let mut rng = stream_rng(6, 0);
        for _ in 0..20 {
            assert!(sample_paired_perturbation(&j, 0.5, &mut rng).unwrap().0.is_null());
        }
    }

    #[test]
    fn paired_draws_are_feasible_and_bounded() {
        let d0 = reference_joint();
        let mut rng = stream_rng(7, 0);
        for _ in 0..500 {
            let (s, _) = sample_paired_perturbation(&d0, 0.3, &mut rng).unwrap();
            assert!(s.satisfies_constraints(&d0));
            assert!(s.max_abs() <= 0.3 + 1e-15);
        }
    }

    #[test]
    fn paired_marginal_keeps_conditional() {
        let d0 = reference_joint();
        let q0 = d0.cond_mean_y2_given_y1_x();
        let mut rng = stream_rng(8, 0);
        for _ in 0..100 {
            let (_, next) = sample_paired_marginal_perturbation(&d0, 0.3, &mut rng).unwrap();
            let q1 = next.cond_mean_y2_given_y1_x();
            for x in 0..2 {
                for y1 in 0..2 {
                    assert!((q0.get(x, y1).unwrap() - q1.get(x, y1).unwrap()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn identical_seeds_reproduce_draws() {
        let d0 = reference_joint();
        for spec in [ShiftSpec::symmetric(0.2), ShiftSpec::asymmetric(0.3), ShiftSpec::paired(0.2)] {
            for mode in [CrossXMode::Independent, CrossXMode::SharedSeed] {
                let spec = spec.with_cross_x(mode);
                let a = spec.sample(&d0, &mut stream_rng(99, 4)).unwrap().0;
                let b = spec.sample(&d0, &mut stream_rng(99, 4)).unwrap().0;
                assert_eq!(a.delta(), b.delta());
            }
        }
    }

    #[test]
    fn shared_seed_couples_rows() {
        // identical rows: shared mode moves them together
        let j = ConditionalJoint::new(
            Alphabet::integer(2, 2, 2).unwrap(),
            vec![0.5, 0.5],
            vec![vec![0.4, 0.1, 0.1, 0.4]; 2],
        )
        .unwrap();
        let spec = ShiftSpec::symmetric(0.2).with_cross_x(CrossXMode::SharedSeed);
        let mut rng = stream_rng(21, 0);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..2000 {
            let (s, _) = spec.sample(&j, &mut rng).unwrap();
            a.push(s.row(0)[0]);
            b.push(s.row(1)[0]);
        }
        let cov = crate::stats::covariance_se(&a, &b);
        assert!(cov.mean > 10.0 * cov.se, "{cov:?}");
        // per-row variance still kappa p (1 - p)
        assert!((variance(&a) - 0.048).abs() < 0.006);
    }

    #[test]
    fn paired_is_centred() {
        let d0 = reference_joint();
        let mut rng = stream_rng(31, 0);
        let draws: Vec<ShiftDraw> = (0..20_000).map(|_| sample_paired_perturbation(&d0, 0.2, &mut rng).unwrap().0).collect();
        for c in 0..8 {
            let xs: Vec<f64> = draws.iter().map(|d| d.delta()[c]).collect();
            let m = mean_se(&xs);
            assert!(m.mean.abs() <= 4.0 * m.se, "cell {c}: {m:?}");
        }
    }
}
