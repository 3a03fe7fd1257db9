use std::fmt;

use cournot_core::Error as ModelError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Model(ModelError),
    /// Some sweep rows failed; the table was still written.
    Rows { exit_code: i32, failed: usize, total: usize, first: String },
    /// An independent check disagreed with the analytic result.
    Oracle(String),
    /// A property check (e.g. dominance) did not hold.
    Check(String),
}

pub fn model_exit_code(e: &ModelError) -> i32 {
    match e {
        ModelError::OracleDisagreement { .. } => EXIT_ORACLE,
        ModelError::InvalidParameter { .. } | ModelError::LengthMismatch { .. } | ModelError::EmptyGrid => EXIT_CONFIG,
        ModelError::AssumptionViolated { .. }
        | ModelError::BracketSign { .. }
        | ModelError::NoConvergence { .. }
        | ModelError::DegenerateDistribution => EXIT_ASSUMPTION,
    }
}

pub fn model_kind(e: &ModelError) -> &'static str {
    match e {
        ModelError::InvalidParameter { .. } => "invalid_parameter",
        ModelError::AssumptionViolated { .. } => "assumption_violated",
        ModelError::BracketSign { .. } => "bracket_sign",
        ModelError::NoConvergence { .. } => "no_convergence",
        ModelError::DegenerateDistribution => "degenerate_distribution",
        ModelError::LengthMismatch { .. } => "length_mismatch",
        ModelError::EmptyGrid => "empty_grid",
        ModelError::OracleDisagreement { .. } => "oracle_disagreement",
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Model(e) => model_exit_code(e),
            CliError::Rows { exit_code, .. } => *exit_code,
            CliError::Oracle(_) => EXIT_ORACLE,
            CliError::Check(_) => EXIT_ASSUMPTION,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config_error",
            CliError::Io(_) => "io_error",
            CliError::Model(e) => model_kind(e),
            CliError::Rows { .. } => "sweep_rows_failed",
            CliError::Oracle(_) => "oracle_disagreement",
            CliError::Check(_) => "check_failed",
        }
    }

    /// Single-line JSON for standard error.
    pub fn to_json_line(&self) -> String {
        let mut v = serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let CliError::Rows { failed, total, .. } = self {
            v["failed_rows"] = (*failed).into();
            v["total_rows"] = (*total).into();
        }
        v.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Oracle(m) | CliError::Check(m) => f.write_str(m),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Rows { failed, total, first, .. } => {
                write!(f, "{failed} of {total} rows failed; first: {first}")
            }
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
