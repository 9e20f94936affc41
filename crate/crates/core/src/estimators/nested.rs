//! Nested predictors over a chain of outcomes `Y_1, ..., Y_T`.
//!
//! The period `-t` data carries outcomes `Y_1..Y_t`. For `t1 < t2` the
//! nested predictor averages `Y_{t2}` under `P_{-t2}` given
//! `Y_{t1}..Y_{t2-1}`, then repeatedly integrates out the last conditioning
//! outcome under the next more recent period, ending with an average over
//! `Y_{t1}` under `P_{-t1}`. Outcomes before `Y_{t1}` are marginalised.

use crate::dist::{ConditionalJoint, Level, PredictorTable, INPUT_TOLERANCE};
use crate::dist::Alphabet;
use crate::error::{Error, Result};

use super::HybridPrediction;
use std::sync::Arc;

/// `P(x)` and `P(y_1, ..., y_t | x)`, paths flattened with `Y_1` most
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainJoint {
    x_labels: Vec<String>,
    levels: Vec<Vec<Level>>,
    px: Vec<f64>,
    cells: Vec<f64>,
}

impl ChainJoint {
    pub fn new(x_labels: Vec<String>, levels: Vec<Vec<Level>>, px: Vec<f64>, table: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() || levels.iter().any(Vec::is_empty) {
            return Err(Error::InvalidAlphabet("every outcome needs at least one level".into()));
        }
        let paths: usize = levels.iter().map(Vec::len).product();
        if px.len() != x_labels.len() || table.len() != x_labels.len() {
            return Err(Error::DimensionMismatch("covariate count differs between labels, px and table".into()));
        }
        let check = |v: &[f64], what: &str| -> Result<()> {
            if v.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidParameter(format!("{what} has a negative or non-finite entry")));
            }
            let s: f64 = v.iter().sum();
            if (s - 1.0).abs() >= INPUT_TOLERANCE {
                return Err(Error::InvalidParameter(format!("{what} sums to {s}")));
            }
            Ok(())
        };
        check(&px, "px")?;
        let mut cells = Vec::with_capacity(paths * x_labels.len());
        for (x, row) in table.iter().enumerate() {
            if row.len() != paths {
                return Err(Error::DimensionMismatch(format!("row {x} has {} paths, expected {paths}", row.len())));
            }
            check(row, &format!("row {}", x_labels[x]))?;
            let s: f64 = row.iter().sum();
            cells.extend(row.iter().map(|p| p / s));
        }
        Ok(ChainJoint { x_labels, levels, px, cells })
    }

    /// The two-outcome chain `(Y1, Y2)` of a joint.
    pub fn from_joint(joint: &ConditionalJoint) -> Self {
        let a = joint.alphabet();
        ChainJoint {
            x_labels: a.x_labels().to_vec(),
            levels: vec![a.y1_levels().to_vec(), a.y2_levels().to_vec()],
            px: joint.px().to_vec(),
            cells: joint.cells().to_vec(),
        }
    }

    /// The joint of `(Y1, Y2)` for a two-outcome chain.
    pub fn to_joint(&self) -> Result<ConditionalJoint> {
        if self.levels.len() != 2 {
            return Err(Error::DimensionMismatch("only two-outcome chains convert to a joint".into()));
        }
        let alphabet = Arc::new(Alphabet::new(self.x_labels.clone(), self.levels[0].clone(), self.levels[1].clone())?);
        let table = (0..self.nx()).map(|x| self.row(x).to_vec()).collect();
        ConditionalJoint::with_alphabet(alphabet, self.px.clone(), table)
    }

    /// Marginal of the first `t` outcomes.
    pub fn truncate(&self, t: usize) -> Result<Self> {
        if t == 0 || t > self.levels.len() {
            return Err(Error::InvalidParameter(format!("cannot keep {t} of {} outcomes", self.levels.len())));
        }
        let tail: usize = self.levels[t..].iter().map(Vec::len).product();
        let cells = self.cells.chunks(tail).map(|c| c.iter().sum()).collect();
        Ok(ChainJoint { x_labels: self.x_labels.clone(), levels: self.levels[..t].to_vec(), px: self.px.clone(), cells })
    }

    pub fn n_outcomes(&self) -> usize {
        self.levels.len()
    }
    pub fn nx(&self) -> usize {
        self.x_labels.len()
    }
    pub fn levels(&self) -> &[Vec<Level>] {
        &self.levels
    }

    fn paths(&self) -> usize {
        self.levels.iter().map(Vec::len).product()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let k = self.paths();
        &self.cells[x * k..(x + 1) * k]
    }

    /// Mass of each path over `Y_{from}..Y_t` (1-based, inclusive) at `x`.
    fn suffix_mass(&self, x: usize, from: usize) -> Vec<f64> {
        let tail: usize = self.levels[from - 1..].iter().map(Vec::len).product();
        let mut out = vec![0.0; tail];
        for (i, p) in self.row(x).iter().enumerate() {
            out[i % tail] += p;
        }
        out
    }
}

/// Nested predictor `tau^{t1-t2}`; `joints[t - 1]` is the period `-t` chain
/// carrying `t` outcomes.
///
/// Where a conditioning path has zero mass in the period being averaged,
/// that stage's covariate-level mean is used, and the covariate is flagged if
/// the more recent period gives the path positive mass.
pub fn tau_nested(joints: &[ChainJoint], t1: usize, t2: usize) -> Result<HybridPrediction> {
    if !(1 <= t1 && t1 < t2 && t2 <= joints.len()) {
        return Err(Error::InvalidParameter(format!("need 1 <= t1 < t2 <= {}, got t1={t1} t2={t2}", joints.len())));
    }
    let last = &joints[joints.len() - 1];
    for (i, j) in joints.iter().enumerate() {
        if j.n_outcomes() != i + 1 {
            return Err(Error::DimensionMismatch(format!("period -{} must carry {} outcomes", i + 1, i + 1)));
        }
        if j.x_labels != last.x_labels || j.levels[..] != last.levels[..=i] {
            return Err(Error::DimensionMismatch("periods disagree on covariates or outcome levels".into()));
        }
    }
    let nx = last.nx();
    let mut values = Vec::with_capacity(nx);
    let mut flagged = vec![false; nx];
    for x in 0..nx {
        // the function being averaged, indexed by paths over Y_{t1}..Y_s
        let vals_t2: Vec<f64> = last.levels[t2 - 1].iter().map(|l| l.value).collect();
        let mut g: Vec<f64> = {
            let mass = joints[t2 - 1].suffix_mass(x, t1);
            (0..mass.len()).map(|i| vals_t2[i % vals_t2.len()]).collect()
        };
        let mut pending_absent: Vec<bool> = Vec::new();
        for s in (t1..=t2).rev() {
            let mass = joints[s - 1].suffix_mass(x, t1);
            if !pending_absent.is_empty() {
                for (i, absent) in pending_absent.iter().enumerate() {
                    if *absent && mass[i] > 0.0 {
                        flagged[x] = true;
                    }
                }
            }
            let ns = last.levels[s - 1].len();
            let total: f64 = mass.iter().zip(&g).map(|(m, v)| m * v).sum::<f64>() / mass.iter().sum::<f64>();
            let mut next = Vec::with_capacity(mass.len() / ns);
            pending_absent = Vec::with_capacity(mass.len() / ns);
            for (mc, gc) in mass.chunks(ns).zip(g.chunks(ns)) {
                let m: f64 = mc.iter().sum();
                if m > 0.0 {
                    next.push(mc.iter().zip(gc).map(|(a, b)| a * b).sum::<f64>() / m);
                    pending_absent.push(false);
                } else {
                    next.push(total);
                    pending_absent.push(true);
                }
            }
            g = next;
        }
        debug_assert_eq!(g.len(), 1);
        values.push(g[0]);
    }
    let alphabet = Arc::new(Alphabet::new(last.x_labels.clone(), last.levels[0].clone(), last.levels[t2 - 1].clone())?);
    Ok(HybridPrediction { table: PredictorTable::from_vec(alphabet, values), flagged })
}
