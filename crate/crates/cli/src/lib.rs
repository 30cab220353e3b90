//! Scenario loading and the `solve`, `sim` and `verify` drivers behind the
//! `dtfl` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

pub use commands::{
    sim_files, solve_files, verify, write_files, SimOptions, SolveOptions, VerifyOptions, VerifyReport,
};
pub use config::ScenarioConfig;
pub use error::{exit, CliError, Result};
