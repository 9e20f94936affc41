use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::samples::SampleSet;

/// Induces an empirical shift by shuffling covariates.
///
/// Each round picks `floor(fraction * n)` rows uniformly without replacement
/// and permutes their covariates among themselves, uniformly over all
/// permutations (fixed points allowed). Outcomes stay on their rows.
pub fn permute_covariates<R: Rng + ?Sized>(
    samples: &SampleSet,
    fraction: f64,
    rounds: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    if samples.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!("permutation fraction must lie in [0, 1], got {fraction}")));
    }
    let mut rows = samples.rows().to_vec();
    let n = rows.len();
    let k = ((fraction * n as f64).floor() as usize).min(n);
    for _ in 0..rounds {
        if k < 2 {
            break;
        }
        let mut picked = index::sample(rng, n, k).into_vec();
        picked.sort_unstable();
        let mut xs: Vec<usize> = picked.iter().map(|&i| rows[i].x).collect();
        xs.shuffle(rng);
        for (&i, x) in picked.iter().zip(xs) {
            rows[i].x = x;
        }
    }
    Ok(SampleSet::from_rows_unchecked(samples.alphabet_arc().clone(), rows))
}
