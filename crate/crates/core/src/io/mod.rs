//! Files: sample CSVs, scenario configs, report tables and assignment inputs.

mod assignment_csv;
mod config;
mod dataset;
mod report;

pub(crate) use assignment_csv::load_truth;
pub use assignment_csv::{assignment_table, load_assignment_instance, save_assignment};
pub use config::{
    AssignSection, EstimateSection, ExperimentSection, FiniteSampleSection, InduceShiftSection, JointInput, JointSpec,
    PermutationData, PermutationSection, ScenarioConfig, ValidateSection, SCHEMA_VERSION,
};
pub use dataset::{load_dataset, load_datasets, read_dataset, save_dataset, write_dataset};
pub use report::{fmt_num, fmt_opt, Table};

use crate::error::Error;

pub(crate) fn io_err(path: &std::path::Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}
