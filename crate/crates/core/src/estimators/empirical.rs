//! Sample-proportion versions of the three predictors.
//!
//! Everything is computed from [`PeriodCounts`], so row-level data and the
//! count-level simulations share one implementation.

use std::sync::Arc;

use crate::dist::{weighted_affine_fit, Alphabet, ConditionalMeans, PredictorTable, ProxyScaling};
use crate::error::{Error, Result};
use crate::samples::{PeriodCounts, SampleSet, PERIOD_FULL, PERIOD_PROXY};

use super::HybridPrediction;

/// First stage of the hybrid: `Q^(x, y1)`, the mean of Y2 over period -2 rows
/// in cell `(x, y1)`, and the covariate-level mean used where a cell is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedFirstStage {
    pub q: ConditionalMeans,
    pub fallback: Vec<f64>,
}

impl FittedFirstStage {
    pub fn from_counts(alphabet: &Alphabet, counts: &PeriodCounts) -> Result<Self> {
        let (n1, n2) = (alphabet.n1(), alphabet.n2());
        let mut q = Vec::with_capacity(alphabet.nx() * n1);
        let mut fallback = Vec::with_capacity(alphabet.nx());
        for x in 0..alphabet.nx() {
            let row = counts.full_x(x);
            let n: u64 = row.iter().sum();
            if n == 0 {
                return Err(missing(alphabet, x, PERIOD_FULL));
            }
            let mut total = 0.0;
            for chunk in row.chunks(n2) {
                let m: u64 = chunk.iter().sum();
                let s: f64 = chunk.iter().enumerate().map(|(j, &c)| c as f64 * alphabet.y2_value(j)).sum();
                total += s;
                q.push((m > 0).then(|| s / m as f64));
            }
            fallback.push(total / n as f64);
        }
        Ok(FittedFirstStage { q: ConditionalMeans::from_vec(n1, q), fallback })
    }

    /// `Q^(x, y1)`, or the covariate-level mean where the cell is empty.
    pub fn value(&self, x: usize, y1: usize) -> f64 {
        self.q.get(x, y1).unwrap_or(self.fallback[x])
    }
}

fn missing(alphabet: &Alphabet, x: usize, period: i32) -> Error {
    Error::MissingCovariateCell { x: alphabet.x_labels()[x].clone(), period }
}

pub fn fit_first_stage(samples: &SampleSet) -> Result<FittedFirstStage> {
    FittedFirstStage::from_counts(samples.alphabet(), &samples.counts())
}

pub fn hat_tau_a(samples: &SampleSet) -> Result<PredictorTable> {
    counts::tau_a(samples.alphabet_arc(), &samples.counts())
}

pub fn hat_tau_b(samples: &SampleSet, scaling: &ProxyScaling) -> Result<PredictorTable> {
    counts::tau_b(samples.alphabet_arc(), &samples.counts(), scaling)
}

pub fn hat_tau_c(samples: &SampleSet) -> Result<HybridPrediction> {
    counts::tau_c(samples.alphabet_arc(), &samples.counts())
}

/// Proxy scaling fitted on the period -2 sample means.
pub fn fit_proxy_scaling_empirical(samples: &SampleSet) -> Result<ProxyScaling> {
    counts::proxy_scaling(samples.alphabet(), &samples.counts())
}

/// The same estimators on precomputed cell counts.
pub mod counts {
    use super::*;

    pub fn tau_a(alphabet: &Arc<Alphabet>, c: &PeriodCounts) -> Result<PredictorTable> {
        let fs = FittedFirstStage::from_counts(alphabet, c)?;
        Ok(PredictorTable::from_vec(alphabet.clone(), fs.fallback))
    }

    fn proxy_means(alphabet: &Alphabet, c: &PeriodCounts) -> Result<Vec<f64>> {
        (0..alphabet.nx())
            .map(|x| {
                let row = c.proxy_x(x);
                let n: u64 = row.iter().sum();
                if n == 0 {
                    return Err(missing(alphabet, x, PERIOD_PROXY));
                }
                Ok(row.iter().enumerate().map(|(i, &k)| k as f64 * alphabet.y1_value(i)).sum::<f64>() / n as f64)
            })
            .collect()
    }

    pub fn tau_b(alphabet: &Arc<Alphabet>, c: &PeriodCounts, scaling: &ProxyScaling) -> Result<PredictorTable> {
        let m = proxy_means(alphabet, c)?;
        Ok(PredictorTable::from_vec(alphabet.clone(), m.into_iter().map(|v| scaling.apply(v)).collect()))
    }

    pub fn tau_c(alphabet: &Arc<Alphabet>, c: &PeriodCounts) -> Result<HybridPrediction> {
        let fs = FittedFirstStage::from_counts(alphabet, c)?;
        let mut values = Vec::with_capacity(alphabet.nx());
        let mut flagged = vec![false; alphabet.nx()];
        for x in 0..alphabet.nx() {
            let row = c.proxy_x(x);
            let n: u64 = row.iter().sum();
            if n == 0 {
                return Err(missing(alphabet, x, PERIOD_PROXY));
            }
            let mut s = 0.0;
            for (y1, &k) in row.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                flagged[x] |= fs.q.get(x, y1).is_none();
                s += k as f64 * fs.value(x, y1);
            }
            values.push(s / n as f64);
        }
        Ok(HybridPrediction { table: PredictorTable::from_vec(alphabet.clone(), values), flagged })
    }

    /// Positive affine fit of period -2 Y2 means on Y1 means, weighted by the
    /// period -2 covariate frequencies.
    pub fn proxy_scaling(alphabet: &Alphabet, c: &PeriodCounts) -> Result<ProxyScaling> {
        let n2 = alphabet.n2();
        let mut w = Vec::with_capacity(alphabet.nx());
        let mut m1 = Vec::with_capacity(alphabet.nx());
        let mut m2 = Vec::with_capacity(alphabet.nx());
        for x in 0..alphabet.nx() {
            let row = c.full_x(x);
            let n: u64 = row.iter().sum();
            if n == 0 {
                return Err(missing(alphabet, x, PERIOD_FULL));
            }
            let (mut s1, mut s2) = (0.0, 0.0);
            for (cell, &k) in row.iter().enumerate() {
                s1 += k as f64 * alphabet.y1_value(cell / n2);
                s2 += k as f64 * alphabet.y2_value(cell % n2);
            }
            w.push(n as f64);
            m1.push(s1 / n as f64);
            m2.push(s2 / n as f64);
        }
        Ok(weighted_affine_fit(&w, &m1, &m2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::reference_joint;
    use crate::estimators::{tau_a, tau_c};
    use crate::rng::stream_rng;
    use crate::samples::{draw_period, SampleRow};

    fn rows_at_x0(cells: &[(usize, usize)]) -> SampleSet {
        let a = Arc::new(Alphabet::integer(1, 2, 2).unwrap());
        let rows = cells.iter().map(|&(y1, y2)| SampleRow { period: -2, x: 0, y1: Some(y1), y2: Some(y2) }).collect();
        SampleSet::new(a, rows).unwrap()
    }

    #[test]
    fn first_stage_means() {
        let fs = fit_first_stage(&rows_at_x0(&[(0, 0), (0, 1), (1, 1), (1, 1)])).unwrap();
        assert_eq!(fs.q.get(0, 0), Some(0.5));
        assert_eq!(fs.q.get(0, 1), Some(1.0));
        assert_eq!(fs.fallback, vec![0.75]);
    }

    #[test]
    fn first_stage_absent_cell() {
        let fs = fit_first_stage(&rows_at_x0(&[(1, 0), (1, 1)])).unwrap();
        assert_eq!(fs.q.get(0, 0), None);
        assert_eq!(fs.q.get(0, 1), Some(0.5));
        assert_eq!(fs.value(0, 0), 0.5);
    }

    #[test]
    fn missing_covariate_is_reported() {
        let a = Arc::new(Alphabet::integer(2, 2, 2).unwrap());
        let s = SampleSet::new(a, vec![SampleRow { period: -2, x: 0, y1: Some(0), y2: Some(0) }]).unwrap();
        assert!(matches!(hat_tau_a(&s), Err(Error::MissingCovariateCell { period: -2, .. })));
        assert!(matches!(hat_tau_b(&s, &ProxyScaling::identity()), Err(Error::MissingCovariateCell { period: -1, .. })));
    }

    #[test]
    fn large_sample_standard_estimate() {
        let s = draw_period(&reference_joint(), -2, 1_000_000, &mut stream_rng(9, 0)).unwrap();
        let t = hat_tau_a(&s).unwrap();
        assert!(t.max_abs_diff(&tau_a(&reference_joint())) < 0.005);
    }

    #[test]
    fn empirical_tower_identity() {
        // period -1 rows are the (x, y1) columns of the period -2 rows
        let full = draw_period(&reference_joint(), -2, 500, &mut stream_rng(10, 0)).unwrap();
        let proxy_rows = full.rows().iter().map(|r| SampleRow { period: -1, y2: None, ..*r }).collect();
        let proxy = SampleSet::new(full.alphabet_arc().clone(), proxy_rows).unwrap();
        let both = full.concat(&proxy).unwrap();
        let a = hat_tau_a(&both).unwrap();
        let c = hat_tau_c(&both).unwrap();
        assert!(a.max_abs_diff(&c.table) < 1e-15);
    }

    #[test]
    fn plug_ins_match_population_on_the_empirical_joint() {
        let mut rng = stream_rng(11, 0);
        let d0 = reference_joint();
        let full = draw_period(&d0, -2, 400, &mut rng).unwrap();
        let emp = full.empirical_joint().unwrap();
        let proxy_rows = full.rows().iter().map(|r| SampleRow { period: -1, y2: None, ..*r }).collect();
        let both = full.concat(&SampleSet::new(full.alphabet_arc().clone(), proxy_rows).unwrap()).unwrap();
        let pop = tau_c(&emp, &emp).unwrap();
        assert!(hat_tau_c(&both).unwrap().table.max_abs_diff(&pop.table) < 1e-14);
        let s_pop = emp.fit_proxy_scaling();
        let s_hat = fit_proxy_scaling_empirical(&both).unwrap();
        assert!((s_pop.slope - s_hat.slope).abs() < 1e-12);
    }

    #[test]
    fn proxy_equal_to_target_is_consistent() {
        let a = Arc::new(Alphabet::integer(1, 2, 2).unwrap());
        let joint = crate::dist::ConditionalJoint::with_alphabet(a, vec![1.0], vec![vec![0.3, 0.0, 0.0, 0.7]]).unwrap();
        let s = draw_period(&joint, -1, 100_000, &mut stream_rng(12, 0)).unwrap();
        let b = hat_tau_b(&s, &ProxyScaling::identity()).unwrap();
        assert!((b.get(0) - 0.7).abs() < 0.01);
    }
}
