//! Prediction of a long-term outcome `Y2` when the data distribution drifts
//! randomly between periods and a shorter-term proxy `Y1` is seen one period
//! earlier.
//!
//! Three predictors are compared: the standard one fitted on the oldest fully
//! labelled period, the proxy one fitted on the recent period, and the hybrid
//! that fits `E[Y2 | Y1, X]` on the old period and averages it under the
//! recent law of `Y1`. Everything works over finite alphabets, so population
//! quantities are exact sums.
//!
//! - [`dist`]: joints, conditional means, noise terms
//! - [`shift`]: random shift generators and their moment checks
//! - [`estimators`]: population and plug-in predictors, the nested family
//! - [`theory`]: closed-form error and variance predictions
//! - [`mc`]: seeded Monte Carlo experiments and the shuffling benchmark
//! - [`assignment`]: capacity- and group-constrained placement
//! - [`io`], [`cli`]: files and the `proxyshift` command

pub mod dist;
pub mod error;
pub mod rng;
pub mod samples;
pub mod shift;
pub mod stats;
pub mod estimators;
pub mod theory;
pub mod mc;
pub mod assignment;
pub mod io;
pub mod cli;
