//! JSON scenario configs.
//!
//! One file may carry sections for several subcommands; each subcommand
//! reads only its own. The sidecar written next to every output is the
//! config as run, with the seed and all defaults filled in.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::{reference_joint, Alphabet, ConditionalJoint, Level};
use crate::error::{Error, Result};
use crate::estimators::Method;
use crate::mc::proxy_strength_joint;
use crate::mc::{ScalingMode, XWeighting};
use crate::shift::ShiftSpec;

use super::io_err;

pub const SCHEMA_VERSION: &str = "1";

/// Explicit joint: covariate labels, outcome levels, `P(x)` and the
/// y1-major rows of `P(y1, y2 | x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointSpec {
    pub x_labels: Vec<String>,
    pub y1_levels: Vec<Level>,
    pub y2_levels: Vec<Level>,
    pub px: Vec<f64>,
    pub table: Vec<Vec<f64>>,
}

impl JointSpec {
    pub fn from_joint(joint: &ConditionalJoint) -> Self {
        let a = joint.alphabet();
        JointSpec {
            x_labels: a.x_labels().to_vec(),
            y1_levels: a.y1_levels().to_vec(),
            y2_levels: a.y2_levels().to_vec(),
            px: joint.px().to_vec(),
            table: (0..joint.nx()).map(|x| joint.row(x).to_vec()).collect(),
        }
    }

    pub fn to_joint(&self) -> Result<ConditionalJoint> {
        let a = Alphabet::new(self.x_labels.clone(), self.y1_levels.clone(), self.y2_levels.clone())?;
        ConditionalJoint::new(a, self.px.clone(), self.table.clone())
    }
}

/// A joint given inline or by preset name.
///
/// Presets: `reference` (the two-covariate binary joint of
/// [`reference_joint`]) and `proxy_strength:<s>` (see
/// [`proxy_strength_joint`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JointInput {
    Preset { preset: String },
    Explicit(JointSpec),
}

impl JointInput {
    pub fn reference() -> Self {
        JointInput::Preset { preset: "reference".into() }
    }

    pub fn resolve(&self) -> Result<ConditionalJoint> {
        match self {
            JointInput::Explicit(spec) => spec.to_joint(),
            JointInput::Preset { preset } => {
                if preset == "reference" {
                    return Ok(reference_joint());
                }
                if let Some(s) = preset.strip_prefix("proxy_strength:") {
                    let s: f64 = s.parse().map_err(|_| Error::Config(format!("bad proxy strength in preset {preset:?}")))?;
                    return proxy_strength_joint(s);
                }
                Err(Error::Config(format!("unknown joint preset {preset:?}")))
            }
        }
    }
}

/// Shift experiments (`verify-theorem1`, `verify-theorem2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub joint: JointInput,
    pub shift_m2: ShiftSpec,
    pub shift_m1: ShiftSpec,
    pub n_reps: usize,
    #[serde(default)]
    pub x_weighting: XWeighting,
    #[serde(default)]
    pub scaling: ScalingMode,
}

impl ExperimentSection {
    pub fn theorem1_default() -> Self {
        ExperimentSection {
            joint: JointInput::reference(),
            shift_m2: ShiftSpec::symmetric(0.1),
            shift_m1: ShiftSpec::symmetric(0.05),
            n_reps: 10_000,
            x_weighting: XWeighting::default(),
            scaling: ScalingMode::default(),
        }
    }

    pub fn theorem2_default() -> Self {
        ExperimentSection {
            shift_m2: ShiftSpec::asymmetric(0.3),
            shift_m1: ShiftSpec::asymmetric(0.3),
            ..Self::theorem1_default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSampleSection {
    pub joint: JointInput,
    /// Covariate label at which variances are compared.
    pub x: String,
    pub n_m2: u64,
    pub n_m1: u64,
    pub n_reps: usize,
    /// `[b1, b0]` of the rescaled proxy estimator; omitted means no proxy row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_proxy_beta: Option<(f64, f64)>,
    #[serde(default)]
    pub assert_linear_proxy: bool,
}

impl Default for FiniteSampleSection {
    fn default() -> Self {
        FiniteSampleSection {
            joint: JointInput::reference(),
            x: "0".into(),
            n_m2: 20_000,
            n_m1: 10_000,
            n_reps: 2000,
            linear_proxy_beta: None,
            assert_linear_proxy: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PermutationData {
    ProxyStrengths(Vec<f64>),
    Joint(JointInput),
    /// Path of a sample CSV; rows with both outcomes are used.
    Dataset(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermutationSection {
    pub data: PermutationData,
    pub shift_grid: Vec<f64>,
    pub n_splits: usize,
    pub n_rows: usize,
}

impl Default for PermutationSection {
    fn default() -> Self {
        PermutationSection {
            data: PermutationData::ProxyStrengths(vec![0.5, 0.9]),
            shift_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            n_splits: 200,
            n_rows: 3000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSection {
    pub method: Method,
    pub train_m2: String,
    pub train_m1: String,
    pub target: String,
    /// Proxy rescaling for method B: fitted on `train_m2` or the identity.
    #[serde(default)]
    pub scaling: ScalingMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum InduceShiftSection {
    /// Draws shifted joints from a generator.
    Joint { joint: JointInput, spec: ShiftSpec, n_draws: usize },
    /// Permutes covariates of a sample CSV.
    Dataset { path: String, fraction: f64, rounds: usize },
}

impl Default for InduceShiftSection {
    fn default() -> Self {
        InduceShiftSection::Joint { joint: JointInput::reference(), spec: ShiftSpec::symmetric(0.2), n_draws: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub joint: JointInput,
    pub spec: ShiftSpec,
    pub n_draws: usize,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection { joint: JointInput::reference(), spec: ShiftSpec::symmetric(0.2), n_draws: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignSection {
    pub weights: String,
    pub capacities: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<String>,
    /// True weights for scoring the chosen assignment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: String,
    /// Subcommand the config was resolved for; absent in hand-written files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Mandatory once resolved; may come from `--seed` instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite_sample: Option<FiniteSampleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<PermutationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<EstimateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub induce_shift: Option<InduceShiftSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate_generator: Option<ValidateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assign: Option<AssignSection>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            schema_version: SCHEMA_VERSION.into(),
            command: None,
            seed: None,
            out: None,
            experiment: None,
            finite_sample: None,
            permutation: None,
            estimate: None,
            induce_shift: None,
            validate_generator: None,
            assign: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("line {}: {e}", e.line())))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unrecognised schema_version {:?}, expected {SCHEMA_VERSION:?}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serialises");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| io_err(path, e))
    }

    /// The seed, which must be set by now.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config("a seed is mandatory: set \"seed\" in the config or pass --seed".into()))
    }
}
