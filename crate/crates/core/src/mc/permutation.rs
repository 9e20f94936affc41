//! Benchmark with shifts induced by shuffling covariates.
//!
//! Every split partitions the rows into three equal periods. Period -1 rows
//! get one round of covariate shuffling at the shift level and period -2 rows
//! two, so older data drift further from the untouched period 0. The plug-in
//! predictors and an intercept-only baseline are fitted on the shuffled
//! periods and scored on period 0.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{Alphabet, ConditionalJoint, PredictorTable};
use crate::error::{Error, Result};
use crate::estimators::empirical::counts;
use crate::rng::{child_seed, stream_rng};
use crate::samples::{JointSampler, LabeledRow, PeriodCounts, SampleSet, PERIOD_FULL, PERIOD_PROXY};
use crate::shift::permute_covariates;
use crate::stats::{mean_se, MeanSe};

/// Column order of the per-method arrays in [`CurvePoint`].
pub const BENCH_METHODS: [&str; 4] = ["A", "B_scaled", "C", "intercept"];

const NX: usize = 4;
const P_Y1: [f64; NX] = [0.2, 0.4, 0.6, 0.8];
const P_Y2_FREE: [f64; NX] = [0.7, 0.2, 0.9, 0.3];

/// Synthetic joint whose proxy strength is `s`: at covariate `x`,
/// `Y1 ~ Bernoulli(a_x)` and `Y2` copies `Y1` with probability `s`, else is an
/// independent `Bernoulli(b_x)`. Covariates are uniform over four levels.
pub fn proxy_strength_joint(s: f64) -> Result<ConditionalJoint> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("proxy strength must lie in [0, 1], got {s}")));
    }
    let table = (0..NX)
        .map(|x| {
            let (a, b) = (P_Y1[x], P_Y2_FREE[x]);
            let y2_given = |y1: f64| s * y1 + (1.0 - s) * b;
            let (q0, q1) = (y2_given(0.0), y2_given(1.0));
            vec![(1.0 - a) * (1.0 - q0), (1.0 - a) * q0, a * (1.0 - q1), a * q1]
        })
        .collect();
    ConditionalJoint::new(Alphabet::integer(NX, 2, 2)?, vec![1.0 / NX as f64; NX], table)
}

#[derive(Debug, Clone, PartialEq)]
pub enum BenchmarkData {
    /// One curve per proxy strength of [`proxy_strength_joint`].
    ProxyStrengths(Vec<f64>),
    /// A single synthetic generator.
    Joint(ConditionalJoint),
    /// Fully labelled rows; R² is scored against held-out outcomes.
    Rows(Arc<Alphabet>, Vec<LabeledRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermutationConfig {
    pub data: BenchmarkData,
    pub shift_grid: Vec<f64>,
    pub n_splits: usize,
    /// Rows drawn per split from synthetic generators.
    pub n_rows: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub proxy_strength: Option<f64>,
    pub shift: f64,
    /// Per method, in [`BENCH_METHODS`] order.
    pub mse: [MeanSe; 4],
    pub r2: [MeanSe; 4],
    /// Paired `MSE(C) - MSE(A)` over splits.
    pub c_minus_a: MeanSe,
    /// Paired `MSE(C) - MSE(B_scaled)` over splits.
    pub c_minus_b: MeanSe,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationReport {
    pub points: Vec<CurvePoint>,
}

struct Source {
    strength: Option<f64>,
    alphabet: Arc<Alphabet>,
    sampler: Option<JointSampler>,
    truth: Option<PredictorTable>,
    rows: Vec<LabeledRow>,
}

pub fn run_permutation_benchmark(cfg: &PermutationConfig) -> Result<PermutationReport> {
    if cfg.n_splits < 2 {
        return Err(Error::InvalidParameter("need at least two splits".into()));
    }
    if cfg.shift_grid.is_empty() || cfg.shift_grid.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::InvalidParameter("shift grid must be a non-empty subset of [0, 1]".into()));
    }
    let synthetic = |strength: Option<f64>, joint: ConditionalJoint| -> Result<Source> {
        if cfg.n_rows < 6 {
            return Err(Error::InvalidParameter("need at least six rows per split".into()));
        }
        Ok(Source {
            strength,
            alphabet: joint.alphabet_arc().clone(),
            sampler: Some(JointSampler::new(&joint)?),
            truth: Some(joint.cond_mean_y2_given_x()),
            rows: Vec::new(),
        })
    };
    let sources: Vec<Source> = match &cfg.data {
        BenchmarkData::ProxyStrengths(ss) => {
            ss.iter().map(|&s| synthetic(Some(s), proxy_strength_joint(s)?)).collect::<Result<_>>()?
        }
        BenchmarkData::Joint(j) => vec![synthetic(None, j.clone())?],
        BenchmarkData::Rows(a, rows) => {
            if rows.len() < 6 {
                return Err(Error::EmptySampleSet);
            }
            vec![Source { strength: None, alphabet: a.clone(), sampler: None, truth: None, rows: rows.clone() }]
        }
    };
    let mut points = Vec::new();
    for (si, src) in sources.iter().enumerate() {
        let seed = child_seed(cfg.seed, si as u64);
        // per split: one score vector per grid point
        let per_split: Vec<Result<Vec<Scores>>> =
            (0..cfg.n_splits).into_par_iter().map(|split| run_split(src, cfg, seed, split as u64)).collect();
        let per_split: Vec<Vec<Scores>> = per_split.into_iter().collect::<Result<_>>()?;
        for (gi, &shift) in cfg.shift_grid.iter().enumerate() {
            let col = |f: &dyn Fn(&Scores) -> f64| mean_se(&per_split.iter().map(|s| f(&s[gi])).collect::<Vec<_>>());
            points.push(CurvePoint {
                proxy_strength: src.strength,
                shift,
                mse: [0, 1, 2, 3].map(|m| col(&|s| s.mse[m])),
                r2: [0, 1, 2, 3].map(|m| col(&|s| s.r2[m])),
                c_minus_a: col(&|s| s.mse[2] - s.mse[0]),
                c_minus_b: col(&|s| s.mse[2] - s.mse[1]),
            });
        }
    }
    Ok(PermutationReport { points })
}

struct Scores {
    mse: [f64; 4],
    r2: [f64; 4],
}

fn run_split(src: &Source, cfg: &PermutationConfig, seed: u64, split: u64) -> Result<Vec<Scores>> {
    let mut rng = stream_rng(seed, split);
    let mut rows = match &src.sampler {
        Some(s) => s.draw_n(cfg.n_rows, &mut rng),
        None => src.rows.clone(),
    };
    rows.shuffle(&mut rng);
    let third = rows.len() / 3;
    let target = &rows[..third];
    let proxy_set = SampleSet::new(src.alphabet.clone(), rows[third..2 * third].iter().map(|r| r.observe(PERIOD_PROXY)).collect())?;
    let full_set = SampleSet::new(src.alphabet.clone(), rows[2 * third..3 * third].iter().map(|r| r.observe(PERIOD_FULL)).collect())?;
    let truth_at = |r: &LabeledRow| match &src.truth {
        Some(t) => t.get(r.x),
        None => src.alphabet.y2_value(r.y2),
    };
    let y2_at = |r: &LabeledRow| src.alphabet.y2_value(r.y2);
    let truth_mean = target.iter().map(truth_at).sum::<f64>() / target.len() as f64;
    let sst: f64 = target.iter().map(|r| (truth_at(r) - truth_mean).powi(2)).sum();
    let mut out = Vec::with_capacity(cfg.shift_grid.len());
    for (gi, &shift) in cfg.shift_grid.iter().enumerate() {
        let mut prng = stream_rng(child_seed(seed, gi as u64 + 1), split);
        let p1 = permute_covariates(&proxy_set, shift, 1, &mut prng)?;
        let p2 = permute_covariates(&full_set, shift, 2, &mut prng)?;
        let mut c = PeriodCounts::zeros(&src.alphabet);
        for r in p1.rows().iter().chain(p2.rows()) {
            c.add_row(r);
        }
        let preds = fit_all(&src.alphabet, &c)?;
        let mut mse = [0.0; 4];
        let mut r2 = [0.0; 4];
        for (m, p) in preds.iter().enumerate() {
            mse[m] = target.iter().map(|r| (y2_at(r) - p.get(r.x)).powi(2)).sum::<f64>() / target.len() as f64;
            let sse: f64 = target.iter().map(|r| (truth_at(r) - p.get(r.x)).powi(2)).sum();
            r2[m] = if sst > 0.0 { 1.0 - sse / sst } else { 0.0 };
        }
        out.push(Scores { mse, r2 });
    }
    Ok(out)
}

/// Plug-ins A, scaled B, C and the intercept model on shuffled counts. A
/// covariate absent from a shuffled period falls back to the pooled mean.
fn fit_all(alphabet: &Arc<Alphabet>, c: &PeriodCounts) -> Result<[PredictorTable; 4]> {
    let nx = alphabet.nx();
    let n2 = alphabet.n2();
    let n_full: u64 = c.full.iter().sum();
    let y2_sum: f64 = c.full.iter().enumerate().map(|(i, &k)| k as f64 * alphabet.y2_value(i % n2)).sum();
    let intercept = y2_sum / n_full.max(1) as f64;
    // fill empty covariate rows with the pooled distribution so every
    // estimator is defined; at realistic sizes this never triggers
    let mut filled = c.clone();
    let pooled_full: Vec<u64> = (0..alphabet.cells_per_x()).map(|i| (0..nx).map(|x| c.full_x(x)[i]).sum()).collect();
    let pooled_proxy: Vec<u64> = (0..alphabet.n1()).map(|i| (0..nx).map(|x| c.proxy_x(x)[i]).sum()).collect();
    for x in 0..nx {
        if c.full_total(x) == 0 {
            let k = alphabet.cells_per_x();
            filled.full[x * k..(x + 1) * k].copy_from_slice(&pooled_full);
        }
        if c.proxy_total(x) == 0 {
            let k = alphabet.n1();
            filled.proxy[x * k..(x + 1) * k].copy_from_slice(&pooled_proxy);
        }
    }
    let scaling = counts::proxy_scaling(alphabet, &filled)?;
    Ok([
        counts::tau_a(alphabet, &filled)?,
        counts::tau_b(alphabet, &filled, &scaling)?,
        counts::tau_c(alphabet, &filled)?.table,
        PredictorTable::from_vec(alphabet.clone(), vec![intercept; nx]),
    ])
}
