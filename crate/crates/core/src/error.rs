use thiserror::Error;

/// Errors raised across the library.
///
/// CLI exit codes are derived from [`Error::exit_code`]: input and schema
/// problems map to 1, infeasibility and generator failures to 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative probability {value} at x={x}, cell {cell}")]
    NegativeProbability { x: String, cell: usize, value: f64 },

    #[error("probabilities for x={x} sum to {sum}, expected 1")]
    RowSumViolation { x: String, sum: f64 },

    #[error("covariate marginal sums to {sum}, expected 1")]
    MarginalSumViolation { sum: f64 },

    #[error("empty support: {0}")]
    EmptySupport(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("zero cell in Dirichlet base at x={x}, y1={y1}, y2={y2}")]
    ZeroCellInBase { x: String, y1: String, y2: String },

    #[error("zero Y1-marginal cell at x={x}, y1={y1}")]
    ZeroMarginalCell { x: String, y1: String },

    #[error("kappa {0} outside the admissible range")]
    KappaOutOfRange(f64),

    #[error("scale {0} outside (0, 1)")]
    ScaleOutOfRange(f64),

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("no rows for covariate {x} in period {period}")]
    MissingCovariateCell { x: String, period: i32 },

    #[error("covariate {0} has zero probability mass")]
    ZeroMassCovariate(String),

    #[error("sigma2_B requires the linear proxy assumption to be asserted")]
    LinearProxyNotAsserted,

    #[error("generator changed the conditional law of Y2 given (Y1, X): {0}")]
    GeneratorViolatesInvariantConditional(String),

    #[error("infeasible assignment{}: {reason}", group.as_ref().map(|g| format!(" (group {g})")).unwrap_or_default())]
    Infeasible { group: Option<String>, reason: String },

    #[error("instance too large for exhaustive enumeration: {0}")]
    InstanceTooLarge(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("schema violation at line {line}: {reason}")]
    SchemaViolation { line: usize, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable code used on `ERROR <code> <message>` lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NegativeProbability { .. } => "negative_probability",
            Error::RowSumViolation { .. } => "row_sum_violation",
            Error::MarginalSumViolation { .. } => "marginal_sum_violation",
            Error::EmptySupport(_) => "empty_support",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidAlphabet(_) => "invalid_alphabet",
            Error::ZeroCellInBase { .. } => "zero_cell_in_base",
            Error::ZeroMarginalCell { .. } => "zero_marginal_cell",
            Error::KappaOutOfRange(_) => "kappa_out_of_range",
            Error::ScaleOutOfRange(_) => "scale_out_of_range",
            Error::EmptySampleSet => "empty_sample_set",
            Error::MissingCovariateCell { .. } => "missing_covariate_cell",
            Error::ZeroMassCovariate(_) => "zero_mass_covariate",
            Error::LinearProxyNotAsserted => "linear_proxy_not_asserted",
            Error::GeneratorViolatesInvariantConditional(_) => "generator_violates_conditional",
            Error::Infeasible { .. } => "infeasible",
            Error::InstanceTooLarge(_) => "instance_too_large",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::ParseError { .. } => "parse_error",
            Error::SchemaViolation { .. } => "schema_violation",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible { .. }
            | Error::ZeroCellInBase { .. }
            | Error::ZeroMarginalCell { .. }
            | Error::GeneratorViolatesInvariantConditional(_) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
