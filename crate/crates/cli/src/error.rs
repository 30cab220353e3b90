use std::path::PathBuf;

use serde_json::{json, Value};

/// Process exit status for each outcome.
pub mod exit {
    pub const OK: i32 = 0;
    pub const PROBE_FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] dtfl_core::Error),
    #[error("{} probe(s) failed", failed.len())]
    ProbeFailure { failed: Vec<String>, counterexamples: Value },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => exit::CONFIG,
            CliError::Core(dtfl_core::Error::Validation(_) | dtfl_core::Error::Domain(_)) => exit::CONFIG,
            CliError::Core(_) => exit::INFEASIBLE,
            CliError::ProbeFailure { .. } => exit::PROBE_FAILURE,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Core(e) if e.is_infeasible() => "infeasible",
            CliError::Core(dtfl_core::Error::Validation(_) | dtfl_core::Error::Domain(_)) => "config",
            CliError::Core(dtfl_core::Error::DualNotConverged { .. }) => "not_converged",
            CliError::Core(_) => "solver",
            CliError::ProbeFailure { .. } => "probe_failure",
        }
    }

    /// The machine-readable form printed to stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::ProbeFailure { failed, counterexamples } = self {
            v["failed"] = json!(failed);
            v["counterexamples"] = counterexamples.clone();
        }
        v
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
