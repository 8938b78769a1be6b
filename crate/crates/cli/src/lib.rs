//! Scenario files and commands behind the `ahosm` binary.

pub mod commands;
pub mod scenario;

pub use commands::{CliError, RunSummary};
pub use scenario::{Scenario, ScenarioError, ScenarioFile};
