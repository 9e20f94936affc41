//! The standard, proxy and hybrid predictors.
//!
//! With `P_{-2}` the oldest fully labelled period and `P_{-1}` the period
//! that only carries the proxy:
//!
//! * `tau_A(x) = E_{-2}[Y2 | x]`
//! * `tau_B(x) = slope * E_{-1}[Y1 | x] + intercept`
//! * `tau_C(x) = E_{-1}[ E_{-2}[Y2 | Y1, x] | x ]`
//!
//! Population versions act on [`ConditionalJoint`]s; the `hat_*` functions in
//! [`empirical`] are their sample-proportion counterparts.

pub mod empirical;
pub mod nested;

pub use empirical::{fit_first_stage, fit_proxy_scaling_empirical, hat_tau_a, hat_tau_b, hat_tau_c, FittedFirstStage};
pub use nested::{tau_nested, ChainJoint};

use serde::{Deserialize, Serialize};

use crate::dist::{ConditionalJoint, PredictorTable, ProxyScaling};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    A,
    #[serde(rename = "B_scaled", alias = "B")]
    B,
    C,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::A, Method::B, Method::C];

    pub fn name(self) -> &'static str {
        match self {
            Method::A => "A",
            Method::B => "B_scaled",
            Method::C => "C",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Method::A),
            "B" | "b" | "B_scaled" => Ok(Method::B),
            "C" | "c" => Ok(Method::C),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?}, expected A, B or C"))),
        }
    }
}

/// A predictor plus the covariates where an absent first-stage cell was
/// replaced by the covariate-level mean.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridPrediction {
    pub table: PredictorTable,
    pub flagged: Vec<bool>,
}

impl HybridPrediction {
    pub fn any_flagged(&self) -> bool {
        self.flagged.iter().any(|f| *f)
    }
}

pub fn tau_a(joint_m2: &ConditionalJoint) -> PredictorTable {
    joint_m2.cond_mean_y2_given_x()
}

pub fn tau_b(joint_m1: &ConditionalJoint, scaling: &ProxyScaling) -> PredictorTable {
    let m1 = joint_m1.cond_mean_y1_given_x();
    let values = m1.values().iter().map(|&v| scaling.apply(v)).collect();
    PredictorTable::from_vec(joint_m1.alphabet_arc().clone(), values)
}

pub fn tau_c(joint_m2: &ConditionalJoint, joint_m1: &ConditionalJoint) -> Result<HybridPrediction> {
    if joint_m2.alphabet() != joint_m1.alphabet() {
        return Err(Error::DimensionMismatch("the two periods use different alphabets".into()));
    }
    let q = joint_m2.cond_mean_y2_given_y1_x();
    let fallback = tau_a(joint_m2);
    let mut values = Vec::with_capacity(joint_m1.nx());
    let mut flagged = vec![false; joint_m1.nx()];
    for x in 0..joint_m1.nx() {
        let mut v = 0.0;
        for (y1, &p) in joint_m1.y1_marginal(x).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            v += p * match q.get(x, y1) {
                Some(m) => m,
                None => {
                    flagged[x] = true;
                    fallback.get(x)
                }
            };
        }
        values.push(v);
    }
    Ok(HybridPrediction { table: PredictorTable::from_vec(joint_m1.alphabet_arc().clone(), values), flagged })
}

/// Evaluates one method on population joints.
pub fn predict(
    method: Method,
    joint_m2: &ConditionalJoint,
    joint_m1: &ConditionalJoint,
    scaling: &ProxyScaling,
) -> Result<PredictorTable> {
    Ok(match method {
        Method::A => tau_a(joint_m2),
        Method::B => tau_b(joint_m1, scaling),
        Method::C => tau_c(joint_m2, joint_m1)?.table,
    })
}
