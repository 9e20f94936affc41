//! Finite labelled samples and their cell counts.
//!
//! Observability follows the three-period pattern: period -2 rows carry both
//! outcomes, period -1 rows only Y1, period 0 rows only the covariate.
//! Estimators only ever need cell counts, so [`PeriodCounts`] is the shared
//! sufficient statistic for row-level data and for the count-level
//! simulations in `mc`.

use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::dist::{Alphabet, ConditionalJoint};
use crate::error::{Error, Result};

pub const PERIOD_FULL: i32 = -2;
pub const PERIOD_PROXY: i32 = -1;
pub const PERIOD_TARGET: i32 = 0;

/// One observed unit. Outcome fields are level indices into the alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleRow {
    pub period: i32,
    pub x: usize,
    pub y1: Option<usize>,
    pub y2: Option<usize>,
}

impl SampleRow {
    /// Checks the observability pattern of the row's period.
    pub fn check_pattern(&self) -> std::result::Result<(), String> {
        match (self.period, self.y1.is_some(), self.y2.is_some()) {
            (PERIOD_FULL, true, true) | (PERIOD_PROXY, true, false) | (PERIOD_TARGET, false, false) => Ok(()),
            (PERIOD_FULL, _, _) => Err("period -2 rows need both y1 and y2".into()),
            (PERIOD_PROXY, _, true) => Err("y2 must be empty in period -1".into()),
            (PERIOD_PROXY, false, _) => Err("period -1 rows need y1".into()),
            (PERIOD_TARGET, _, _) => Err("period 0 rows carry no outcomes".into()),
            (p, _, _) => Err(format!("unsupported period {p}")),
        }
    }
}

/// A fully labelled unit `(x, y1, y2)`, before any period masking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledRow {
    pub x: usize,
    pub y1: usize,
    pub y2: usize,
}

impl LabeledRow {
    /// Drops the outcomes unobserved in `period`.
    pub fn observe(self, period: i32) -> SampleRow {
        SampleRow {
            period,
            x: self.x,
            y1: (period <= PERIOD_PROXY).then_some(self.y1),
            y2: (period <= PERIOD_FULL).then_some(self.y2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    alphabet: Arc<Alphabet>,
    rows: Vec<SampleRow>,
}

impl SampleSet {
    pub fn new(alphabet: Arc<Alphabet>, rows: Vec<SampleRow>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            let bad_index = r.x >= alphabet.nx()
                || r.y1.is_some_and(|v| v >= alphabet.n1())
                || r.y2.is_some_and(|v| v >= alphabet.n2());
            if bad_index {
                return Err(Error::SchemaViolation { line: i + 1, reason: "level index outside alphabet".into() });
            }
            r.check_pattern().map_err(|reason| Error::SchemaViolation { line: i + 1, reason })?;
        }
        Ok(SampleSet { alphabet, rows })
    }

    pub(crate) fn from_rows_unchecked(alphabet: Arc<Alphabet>, rows: Vec<SampleRow>) -> Self {
        SampleSet { alphabet, rows }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
    pub fn alphabet_arc(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }
    pub fn rows(&self) -> &[SampleRow] {
        &self.rows
    }
    pub fn len(&self) -> usize {
        self.rows.len()
    }
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn period_rows(&self, period: i32) -> impl Iterator<Item = &SampleRow> + '_ {
        self.rows.iter().filter(move |r| r.period == period)
    }

    /// Rows of `other` appended; both sets must share one alphabet.
    pub fn concat(&self, other: &SampleSet) -> Result<SampleSet> {
        if self.alphabet != other.alphabet {
            return Err(Error::DimensionMismatch("sample sets use different alphabets".into()));
        }
        let mut rows = self.rows.clone();
        rows.extend_from_slice(&other.rows);
        Ok(SampleSet { alphabet: self.alphabet.clone(), rows })
    }

    pub fn counts(&self) -> PeriodCounts {
        let mut c = PeriodCounts::zeros(&self.alphabet);
        for r in &self.rows {
            c.add_row(r);
        }
        c
    }

    /// Empirical joint of the period -2 rows.
    pub fn empirical_joint(&self) -> Result<ConditionalJoint> {
        self.counts().empirical_joint(&self.alphabet)
    }
}

/// Cell counts per period: `(x, y1, y2)` for period -2, `(x, y1)` for
/// period -1, `x` for period 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodCounts {
    pub(crate) nx: usize,
    pub(crate) n1: usize,
    pub(crate) n2: usize,
    pub full: Vec<u64>,
    pub proxy: Vec<u64>,
    pub target: Vec<u64>,
}

impl PeriodCounts {
    pub fn zeros(a: &Alphabet) -> Self {
        PeriodCounts {
            nx: a.nx(),
            n1: a.n1(),
            n2: a.n2(),
            full: vec![0; a.nx() * a.cells_per_x()],
            proxy: vec![0; a.nx() * a.n1()],
            target: vec![0; a.nx()],
        }
    }

    pub fn add_row(&mut self, r: &SampleRow) {
        match (r.period, r.y1, r.y2) {
            (PERIOD_FULL, Some(y1), Some(y2)) => self.full[(r.x * self.n1 + y1) * self.n2 + y2] += 1,
            (PERIOD_PROXY, Some(y1), _) => self.proxy[r.x * self.n1 + y1] += 1,
            _ => self.target[r.x] += 1,
        }
    }

    pub fn full_x(&self, x: usize) -> &[u64] {
        let k = self.n1 * self.n2;
        &self.full[x * k..(x + 1) * k]
    }

    pub fn proxy_x(&self, x: usize) -> &[u64] {
        &self.proxy[x * self.n1..(x + 1) * self.n1]
    }

    pub fn full_total(&self, x: usize) -> u64 {
        self.full_x(x).iter().sum()
    }

    pub fn proxy_total(&self, x: usize) -> u64 {
        self.proxy_x(x).iter().sum()
    }

    /// Empirical `P(x)` and `P(y1, y2 | x)` from period -2 counts.
    pub fn empirical_joint(&self, alphabet: &Arc<Alphabet>) -> Result<ConditionalJoint> {
        let total: u64 = self.full.iter().sum();
        if total == 0 {
            return Err(Error::EmptySampleSet);
        }
        let mut table = Vec::with_capacity(self.nx);
        let mut px = Vec::with_capacity(self.nx);
        for x in 0..self.nx {
            let n = self.full_total(x);
            if n == 0 {
                return Err(Error::MissingCovariateCell { x: alphabet.x_labels()[x].clone(), period: PERIOD_FULL });
            }
            px.push(n as f64 / total as f64);
            table.push(self.full_x(x).iter().map(|&c| c as f64 / n as f64).collect());
        }
        ConditionalJoint::with_alphabet(alphabet.clone(), px, table)
    }
}

/// Cumulative sampler over the flattened `(x, y1, y2)` cells of a joint.
pub struct JointSampler {
    index: WeightedIndex<f64>,
    n1: usize,
    n2: usize,
}

impl JointSampler {
    pub fn new(joint: &ConditionalJoint) -> Result<Self> {
        let weights: Vec<f64> = (0..joint.nx()).flat_map(|x| joint.row(x).iter().map(move |p| p * joint.px()[x])).collect();
        let index = WeightedIndex::new(weights).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(JointSampler { index, n1: joint.alphabet().n1(), n2: joint.alphabet().n2() })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> LabeledRow {
        let c = self.index.sample(rng);
        let k = self.n1 * self.n2;
        LabeledRow { x: c / k, y1: (c % k) / self.n2, y2: c % self.n2 }
    }

    pub fn draw_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<LabeledRow> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

/// `n` i.i.d. rows from `joint`, masked to the pattern of `period`.
pub fn draw_period<R: Rng + ?Sized>(joint: &ConditionalJoint, period: i32, n: usize, rng: &mut R) -> Result<SampleSet> {
    let sampler = JointSampler::new(joint)?;
    let rows = sampler.draw_n(n, rng).into_iter().map(|r| r.observe(period)).collect();
    SampleSet::new(joint.alphabet_arc().clone(), rows)
}

/// Multinomial counts over `probs` by sequential binomials.
pub fn multinomial<R: Rng + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = vec![0; probs.len()];
    let mut left = n;
    let mut mass = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() || mass <= 0.0 {
            out[i] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).expect("valid binomial").sample(rng);
        out[i] = k;
        left -= k;
        mass -= p;
    }
    out
}

/// Counts of `n_full` period -2 rows and `n_proxy` period -1 rows drawn
/// i.i.d. from `joint`, equivalent in law to [`draw_period`] followed by
/// [`SampleSet::counts`].
pub fn draw_counts<R: Rng + ?Sized>(joint: &ConditionalJoint, n_full: u64, n_proxy: u64, rng: &mut R) -> PeriodCounts {
    let a = joint.alphabet();
    let mut c = PeriodCounts::zeros(a);
    let cell_probs: Vec<f64> = (0..joint.nx()).flat_map(|x| joint.row(x).iter().map(move |p| p * joint.px()[x])).collect();
    c.full = multinomial(n_full, &cell_probs, rng);
    let proxy_probs: Vec<f64> =
        (0..joint.nx()).flat_map(|x| joint.y1_marginal(x).into_iter().map(move |p| p * joint.px()[x])).collect();
    c.proxy = multinomial(n_proxy, &proxy_probs, rng);
    c
}
