//! Finite-alphabet joint distributions over `(X, Y1, Y2)`.
//!
//! A [`ConditionalJoint`] stores the covariate marginal `P(x)` together with
//! one conditional table `P(y1, y2 | x)` per covariate value. Tables are
//! flattened y1-major, so cell `(y1, y2)` of row `x` lives at
//! `x * n1 * n2 + y1 * n2 + y2`.
//!
//! Every estimator and shift generator in the crate acts on this type. It is
//! immutable after construction; shifted joints are new values sharing the
//! same [`Alphabet`] through an `Arc`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums within this distance of 1 are renormalised on input.
pub const INPUT_TOLERANCE: f64 = 1e-9;
/// Tolerance for identities that should hold up to floating point drift.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// An outcome level: a token plus the real value it stands for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub label: String,
    pub value: f64,
}

impl Level {
    pub fn new(label: impl Into<String>, value: f64) -> Self {
        Level { label: label.into(), value }
    }
}

/// Convenience: levels `0, 1, .., k-1` labelled by their integer value.
pub fn integer_levels(k: usize) -> Vec<Level> {
    (0..k).map(|i| Level::new(i.to_string(), i as f64)).collect()
}

/// Ordered covariate tokens and outcome levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alphabet {
    x_labels: Vec<String>,
    y1_levels: Vec<Level>,
    y2_levels: Vec<Level>,
}

fn check_unique<'a>(axis: &str, labels: impl Iterator<Item = &'a str>) -> Result<usize> {
    let mut seen = std::collections::HashSet::new();
    let mut n = 0;
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::InvalidAlphabet(format!("duplicate {axis} label {l:?}")));
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::InvalidAlphabet(format!("{axis} axis has no levels")));
    }
    Ok(n)
}

impl Alphabet {
    pub fn new(x_labels: Vec<String>, y1_levels: Vec<Level>, y2_levels: Vec<Level>) -> Result<Self> {
        check_unique("x", x_labels.iter().map(String::as_str))?;
        check_unique("y1", y1_levels.iter().map(|l| l.label.as_str()))?;
        check_unique("y2", y2_levels.iter().map(|l| l.label.as_str()))?;
        for l in y1_levels.iter().chain(&y2_levels) {
            if !l.value.is_finite() {
                return Err(Error::InvalidAlphabet(format!("level {:?} has non-finite value", l.label)));
            }
        }
        Ok(Alphabet { x_labels, y1_levels, y2_levels })
    }

    /// `nx` covariates labelled `0..nx` and integer-valued outcome levels.
    pub fn integer(nx: usize, n1: usize, n2: usize) -> Result<Self> {
        Alphabet::new((0..nx).map(|i| i.to_string()).collect(), integer_levels(n1), integer_levels(n2))
    }

    pub fn nx(&self) -> usize {
        self.x_labels.len()
    }
    pub fn n1(&self) -> usize {
        self.y1_levels.len()
    }
    pub fn n2(&self) -> usize {
        self.y2_levels.len()
    }
    pub fn cells_per_x(&self) -> usize {
        self.n1() * self.n2()
    }
    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }
    pub fn y1_levels(&self) -> &[Level] {
        &self.y1_levels
    }
    pub fn y2_levels(&self) -> &[Level] {
        &self.y2_levels
    }
    pub fn y1_value(&self, i: usize) -> f64 {
        self.y1_levels[i].value
    }
    pub fn y2_value(&self, i: usize) -> f64 {
        self.y2_levels[i].value
    }
    pub fn x_index(&self, label: &str) -> Option<usize> {
        self.x_labels.iter().position(|l| l == label)
    }
    pub fn y1_index(&self, label: &str) -> Option<usize> {
        self.y1_levels.iter().position(|l| l.label == label)
    }
    pub fn y2_index(&self, label: &str) -> Option<usize> {
        self.y2_levels.iter().position(|l| l.label == label)
    }

    /// Same labels, outcome values of Y2 mapped through `f`.
    pub fn map_y2_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for l in &mut out.y2_levels {
            l.value = f(l.value);
        }
        out
    }
}

/// `P(x)` and `P(y1, y2 | x)` on a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalJoint {
    alphabet: Arc<Alphabet>,
    px: Vec<f64>,
    cells: Vec<f64>,
}

fn validate_simplex(values: &mut [f64], on_neg: impl Fn(usize, f64) -> Error, on_sum: impl Fn(f64) -> Error) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(on_neg(i, v));
        }
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() >= INPUT_TOLERANCE {
        return Err(on_sum(sum));
    }
    if sum != 1.0 {
        values.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(())
}

impl ConditionalJoint {
    /// Validates and (for sub-tolerance drift only) renormalises the input.
    ///
    /// `table[x]` is the y1-major flattening of `P(y1, y2 | x)`.
    pub fn new(alphabet: Alphabet, px: Vec<f64>, table: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_alphabet(Arc::new(alphabet), px, table)
    }

    pub fn with_alphabet(alphabet: Arc<Alphabet>, mut px: Vec<f64>, table: Vec<Vec<f64>>) -> Result<Self> {
        let nx = alphabet.nx();
        let k = alphabet.cells_per_x();
        if table.is_empty() || px.is_empty() {
            return Err(Error::EmptySupport("no covariate rows".into()));
        }
        if px.len() != nx || table.len() != nx {
            return Err(Error::DimensionMismatch(format!(
                "expected {nx} covariate rows, got px={} table={}",
                px.len(),
                table.len()
            )));
        }
        validate_simplex(
            &mut px,
            |i, v| Error::NegativeProbability { x: alphabet.x_labels()[i].clone(), cell: 0, value: v },
            |sum| Error::MarginalSumViolation { sum },
        )?;
        let mut cells = Vec::with_capacity(nx * k);
        for (x, mut row) in table.into_iter().enumerate() {
            if row.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "row for x={} has {} cells, expected {k}",
                    alphabet.x_labels()[x],
                    row.len()
                )));
            }
            let label = &alphabet.x_labels()[x];
            validate_simplex(
                &mut row,
                |cell, value| Error::NegativeProbability { x: label.clone(), cell, value },
                |sum| Error::RowSumViolation { x: label.clone(), sum },
            )?;
            cells.extend(row);
        }
        Ok(ConditionalJoint { alphabet, px, cells })
    }

    /// Builds a joint whose rows are already known to be on the simplex.
    pub(crate) fn from_parts(alphabet: Arc<Alphabet>, px: Vec<f64>, cells: Vec<f64>) -> Self {
        debug_assert_eq!(cells.len(), alphabet.nx() * alphabet.cells_per_x());
        ConditionalJoint { alphabet, px, cells }
    }

    /// Same alphabet and covariate marginal, new conditional cells.
    pub(crate) fn with_cells(&self, cells: Vec<f64>) -> Self {
        Self::from_parts(self.alphabet.clone(), self.px.clone(), cells)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
    pub fn alphabet_arc(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }
    pub fn px(&self) -> &[f64] {
        &self.px
    }
    pub fn nx(&self) -> usize {
        self.alphabet.nx()
    }
    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    /// The flattened conditional table for covariate index `x`.
    pub fn row(&self, x: usize) -> &[f64] {
        let k = self.alphabet.cells_per_x();
        &self.cells[x * k..(x + 1) * k]
    }

    pub fn prob(&self, x: usize, y1: usize, y2: usize) -> f64 {
        self.row(x)[y1 * self.alphabet.n2() + y2]
    }

    /// `P(y1 | x)` for every y1 level.
    pub fn y1_marginal(&self, x: usize) -> Vec<f64> {
        let n2 = self.alphabet.n2();
        self.row(x).chunks(n2).map(|c| c.iter().sum()).collect()
    }

    /// Joint with the same conditionals and a replaced covariate marginal.
    pub fn with_px(&self, px: Vec<f64>) -> Result<Self> {
        let table = (0..self.nx()).map(|x| self.row(x).to_vec()).collect();
        Self::with_alphabet(self.alphabet.clone(), px, table)
    }

    /// Joint with Y2 values re-coded by `f` (same probabilities).
    pub fn map_y2_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(Arc::new(self.alphabet.map_y2_values(f)), self.px.clone(), self.cells.clone())
    }

    fn row_mean(&self, x: usize, f: impl Fn(usize, usize) -> f64) -> f64 {
        let n2 = self.alphabet.n2();
        self.row(x).iter().enumerate().map(|(c, p)| p * f(c / n2, c % n2)).sum()
    }

    /// `E[Y2 | X = x]` for every x.
    pub fn cond_mean_y2_given_x(&self) -> PredictorTable {
        let a = &self.alphabet;
        let values = (0..self.nx()).map(|x| self.row_mean(x, |_, j| a.y2_value(j))).collect();
        PredictorTable::from_vec(self.alphabet.clone(), values)
    }

    /// `E[Y1 | X = x]` for every x.
    pub fn cond_mean_y1_given_x(&self) -> PredictorTable {
        let a = &self.alphabet;
        let values = (0..self.nx()).map(|x| self.row_mean(x, |i, _| a.y1_value(i))).collect();
        PredictorTable::from_vec(self.alphabet.clone(), values)
    }

    /// `E[Y2 | Y1, X]`, absent where `P(y1 | x) = 0`.
    pub fn cond_mean_y2_given_y1_x(&self) -> ConditionalMeans {
        let (n1, n2) = (self.alphabet.n1(), self.alphabet.n2());
        let mut values = Vec::with_capacity(self.nx() * n1);
        for x in 0..self.nx() {
            for (y1, chunk) in self.row(x).chunks(n2).enumerate() {
                debug_assert!(y1 < n1);
                let mass: f64 = chunk.iter().sum();
                if mass > 0.0 {
                    // normalise first so a single-cell chunk returns its value exactly
                    let s: f64 = chunk.iter().enumerate().map(|(j, p)| (p / mass) * self.alphabet.y2_value(j)).sum();
                    values.push(Some(s));
                } else {
                    values.push(None);
                }
            }
        }
        ConditionalMeans { n1, values }
    }

    /// Positive affine map of Y1 minimising the `P(x)`-weighted squared
    /// distance between the conditional means of the mapped Y1 and of Y2.
    pub fn fit_proxy_scaling(&self) -> ProxyScaling {
        let m1 = self.cond_mean_y1_given_x();
        let m2 = self.cond_mean_y2_given_x();
        weighted_affine_fit(&self.px, m1.values(), m2.values())
    }

    /// Per-covariate residual decomposition under `scaling`.
    pub fn noise_terms_at(&self, x: usize, scaling: &ProxyScaling) -> NoiseTerms {
        let a = &self.alphabet;
        let n2 = a.n2();
        let row = self.row(x);
        let q = self.cond_mean_y2_given_y1_x();
        let m2 = self.row_mean(x, |_, j| a.y2_value(j));
        let diff = |i: usize, j: usize| a.y2_value(j) - scaling.apply(a.y1_value(i));
        let mdiff = self.row_mean(x, diff);
        let mut t = NoiseTerms::default();
        for (c, &p) in row.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let (i, j) = (c / n2, c % n2);
            let y2 = a.y2_value(j);
            let qv = q.get(x, i).expect("positive cell implies positive y1 mass");
            t.noise_full += p * (y2 - qv).powi(2);
            t.noise_x += p * (y2 - m2).powi(2);
            t.proxy_resid += p * (diff(i, j) - mdiff).powi(2);
        }
        t.proxy_bias = mdiff * mdiff;
        t
    }

    /// Residual decomposition averaged over the covariate marginal.
    pub fn noise_terms(&self, scaling: &ProxyScaling) -> NoiseTerms {
        self.noise_terms_weighted(scaling, &self.px)
    }

    /// Same as [`noise_terms`](Self::noise_terms) with explicit covariate weights.
    pub fn noise_terms_weighted(&self, scaling: &ProxyScaling, weights: &[f64]) -> NoiseTerms {
        let mut total = NoiseTerms::default();
        for (x, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let t = self.noise_terms_at(x, scaling);
            total.noise_full += w * t.noise_full;
            total.noise_x += w * t.noise_x;
            total.proxy_bias += w * t.proxy_bias;
            total.proxy_resid += w * t.proxy_resid;
        }
        total
    }

    /// Largest cellwise absolute difference between two joints on the same alphabet.
    pub fn max_abs_diff(&self, other: &ConditionalJoint) -> f64 {
        self.cells.iter().zip(&other.cells).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// `P(x)`-weighted least squares of `m2` on `m1`, with the positive-slope fallback.
pub(crate) fn weighted_affine_fit(w: &[f64], m1: &[f64], m2: &[f64]) -> ProxyScaling {
    let tw: f64 = w.iter().sum();
    let mean = |v: &[f64]| w.iter().zip(v).map(|(w, v)| w * v).sum::<f64>() / tw;
    let (e1, e2) = (mean(m1), mean(m2));
    let var1 = w.iter().zip(m1).map(|(w, a)| w * (a - e1).powi(2)).sum::<f64>() / tw;
    let cov = w.iter().zip(m1.iter().zip(m2)).map(|(w, (a, b))| w * (a - e1) * (b - e2)).sum::<f64>() / tw;
    let scale = 1.0 + m1.iter().map(|v| v * v).fold(0.0, f64::max);
    if var1 > 1e-14 * scale {
        let slope = cov / var1;
        if slope > 0.0 {
            return ProxyScaling { slope, intercept: e2 - slope * e1, degenerate: false };
        }
    }
    ProxyScaling { slope: 1.0, intercept: e2 - e1, degenerate: true }
}

/// `E[Y2 | Y1 = y1, X = x]` with explicit absence for zero-mass `(x, y1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMeans {
    n1: usize,
    values: Vec<Option<f64>>,
}

impl ConditionalMeans {
    pub(crate) fn from_vec(n1: usize, values: Vec<Option<f64>>) -> Self {
        ConditionalMeans { n1, values }
    }
    pub fn get(&self, x: usize, y1: usize) -> Option<f64> {
        self.values[x * self.n1 + y1]
    }
    pub fn n1(&self) -> usize {
        self.n1
    }
    pub fn row(&self, x: usize) -> &[Option<f64>] {
        &self.values[x * self.n1..(x + 1) * self.n1]
    }
}

/// Positive affine map applied to Y1 before using it as a stand-in for Y2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyScaling {
    pub slope: f64,
    pub intercept: f64,
    /// Set when the least-squares fit was unusable and the mean-matching
    /// fallback (slope 1) was returned instead.
    #[serde(default)]
    pub degenerate: bool,
}

impl ProxyScaling {
    pub fn new(slope: f64, intercept: f64) -> Result<Self> {
        if !(slope > 0.0) || !slope.is_finite() || !intercept.is_finite() {
            return Err(Error::InvalidParameter(format!("proxy scaling needs slope > 0, got {slope}")));
        }
        Ok(ProxyScaling { slope, intercept, degenerate: false })
    }

    pub fn identity() -> Self {
        ProxyScaling { slope: 1.0, intercept: 0.0, degenerate: false }
    }

    pub fn apply(&self, y1: f64) -> f64 {
        self.slope * y1 + self.intercept
    }

    /// Objective minimised by [`ConditionalJoint::fit_proxy_scaling`].
    pub fn objective(&self, joint: &ConditionalJoint) -> f64 {
        let m1 = joint.cond_mean_y1_given_x();
        let m2 = joint.cond_mean_y2_given_x();
        joint
            .px()
            .iter()
            .zip(m1.values().iter().zip(m2.values()))
            .map(|(w, (a, b))| w * (self.apply(*a) - b).powi(2))
            .sum()
    }
}

/// Residual and proxy-error terms of a joint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct NoiseTerms {
    /// `E[(Y2 - E[Y2|Y1,X])^2]`
    pub noise_full: f64,
    /// `E[(Y2 - E[Y2|X])^2]`
    pub noise_x: f64,
    /// `E[(E[Y2 - Y1~ | X])^2]`
    pub proxy_bias: f64,
    /// `E[(Y2 - Y1~ - E[Y2 - Y1~ | X])^2]`
    pub proxy_resid: f64,
}

/// A prediction for every covariate value of an alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorTable {
    alphabet: Arc<Alphabet>,
    values: Vec<f64>,
}

impl PredictorTable {
    pub fn new(alphabet: Arc<Alphabet>, values: Vec<f64>) -> Result<Self> {
        if values.len() != alphabet.nx() {
            return Err(Error::DimensionMismatch(format!(
                "predictor has {} values for {} covariates",
                values.len(),
                alphabet.nx()
            )));
        }
        Ok(PredictorTable { alphabet, values })
    }

    pub(crate) fn from_vec(alphabet: Arc<Alphabet>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), alphabet.nx());
        PredictorTable { alphabet, values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn get(&self, x: usize) -> f64 {
        self.values[x]
    }
    pub fn by_label(&self, label: &str) -> Option<f64> {
        self.alphabet.x_index(label).map(|i| self.values[i])
    }
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs_diff(&self, other: &PredictorTable) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `sum_x w(x) (self(x) - other(x))^2`
    pub fn weighted_sq_error(&self, other: &PredictorTable, weights: &[f64]) -> f64 {
        weights
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| w * (a - b).powi(2))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.alphabet.x_labels().iter().map(String::as_str).zip(self.values.iter().copied())
    }
}

/// Two-covariate, binary-outcome reference joint used in examples and tests.
///
/// At `x = 0` the outcomes agree with probability 0.8; at `x = 1` they are
/// independent fair coins.
pub fn reference_joint() -> ConditionalJoint {
    ConditionalJoint::new(
        Alphabet::integer(2, 2, 2).expect("static alphabet"),
        vec![0.5, 0.5],
        vec![vec![0.4, 0.1, 0.1, 0.4], vec![0.25; 4]],
    )
    .expect("static joint")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn binary(px: Vec<f64>, rows: Vec<Vec<f64>>) -> ConditionalJoint {
        ConditionalJoint::new(Alphabet::integer(px.len(), 2, 2).unwrap(), px, rows).unwrap()
    }

    #[test]
    fn reference_joint_is_valid() {
        let d0 = reference_joint();
        for x in 0..2 {
            assert_abs_diff_eq!(d0.row(x).iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_negative_cell() {
        let err = ConditionalJoint::new(
            Alphabet::integer(1, 2, 2).unwrap(),
            vec![1.0],
            vec![vec![0.5, 0.51, -0.01, 0.0]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NegativeProbability { .. }), "{err:?}");
    }

    #[test]
    fn rejects_row_sum_098() {
        let err =
            ConditionalJoint::new(Alphabet::integer(1, 2, 2).unwrap(), vec![1.0], vec![vec![0.5, 0.2, 0.2, 0.08]])
                .unwrap_err();
        match err {
            Error::RowSumViolation { sum, .. } => assert_abs_diff_eq!(sum, 0.98, epsilon = 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn renormalises_tiny_drift() {
        let j = ConditionalJoint::new(
            Alphabet::integer(1, 2, 2).unwrap(),
            vec![1.0],
            vec![vec![0.25 + 1e-11, 0.25, 0.25, 0.25]],
        )
        .unwrap();
        assert_abs_diff_eq!(j.row(0).iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let err = Alphabet::new(vec!["a".into(), "a".into()], integer_levels(2), integer_levels(2)).unwrap_err();
        assert!(matches!(err, Error::InvalidAlphabet(_)));
    }

    #[test]
    fn conditional_means_on_reference() {
        let d0 = reference_joint();
        let m = d0.cond_mean_y2_given_x();
        assert_abs_diff_eq!(m.get(0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.get(1), 0.5, epsilon = 1e-15);
        let q = d0.cond_mean_y2_given_y1_x();
        assert_abs_diff_eq!(q.get(0, 0).unwrap(), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(q.get(0, 1).unwrap(), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(q.get(1, 0).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn point_mass_means() {
        let j = binary(vec![0.3, 0.7], vec![vec![0.0, 0.0, 0.0, 1.0]; 2]);
        assert_eq!(j.cond_mean_y2_given_x().values(), &[1.0, 1.0]);
        let q = j.cond_mean_y2_given_y1_x();
        assert_eq!(q.get(0, 0), None);
        assert_eq!(q.get(0, 1), Some(1.0));
    }

    #[test]
    fn proxy_scaling_exact_fit() {
        // m1 = (0.4, 0.6), m2 = (0.5, 0.7)
        let j = binary(
            vec![0.5, 0.5],
            vec![vec![0.3, 0.3, 0.2, 0.2], vec![0.1, 0.3, 0.2, 0.4]],
        );
        assert_abs_diff_eq!(j.cond_mean_y1_given_x().get(0), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(j.cond_mean_y2_given_x().get(1), 0.7, epsilon = 1e-15);
        let s = j.fit_proxy_scaling();
        assert!(!s.degenerate);
        assert_abs_diff_eq!(s.slope, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.intercept, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(s.objective(&j), 0.0, epsilon = 1e-24);
    }

    #[test]
    fn proxy_scaling_constant_means_fall_back() {
        let s = reference_joint().fit_proxy_scaling();
        assert!(s.degenerate);
        assert_eq!((s.slope, s.intercept), (1.0, 0.0));
    }

    #[test]
    fn proxy_scaling_negative_slope_falls_back() {
        // m1 = (0.2, 0.8), m2 = (0.8, 0.2)
        let j = binary(
            vec![0.5, 0.5],
            vec![vec![0.0, 0.8, 0.2, 0.0], vec![0.2, 0.0, 0.6, 0.2]],
        );
        let s = j.fit_proxy_scaling();
        assert!(s.degenerate);
        assert_eq!(s.slope, 1.0);
        assert_abs_diff_eq!(s.intercept, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn noise_terms_on_reference() {
        let t = reference_joint().noise_terms(&ProxyScaling::identity());
        assert_abs_diff_eq!(t.noise_x, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(t.noise_full, 0.205, epsilon = 1e-15);
    }

    #[test]
    fn deterministic_y2_has_zero_full_noise() {
        // y2 = y1 at x=0, y2 = 1 - y1 at x=1
        let j = binary(vec![0.5, 0.5], vec![vec![0.3, 0.0, 0.0, 0.7], vec![0.0, 0.6, 0.4, 0.0]]);
        let t = j.noise_terms(&ProxyScaling::identity());
        assert_abs_diff_eq!(t.noise_full, 0.0, epsilon = 1e-15);
        assert!(t.noise_x > 0.0);
    }

    #[test]
    fn independent_outcomes_equal_noise() {
        let j = binary(vec![0.4, 0.6], vec![vec![0.06, 0.14, 0.24, 0.56], vec![0.25; 4]]);
        let t = j.noise_terms(&ProxyScaling::identity());
        assert_abs_diff_eq!(t.noise_full, t.noise_x, epsilon = 1e-12);
    }
}
