//! Config-driven front end for the `hostguest` simulation library.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;

use std::path::Path;

pub use config::Scenario;
pub use error::CliError;
pub use output::RunReport;
pub use scenarios::Kind;

/// Parses and validates a config file without computing anything.
pub fn validate(path: &Path) -> Result<Scenario, CliError> {
    config::load(path)
}

pub fn run(path: &Path, output_dir: Option<&Path>, threads: usize) -> Result<RunReport, CliError> {
    let scenario = config::load(path)?;
    let dir = output::resolve_output_dir(&scenario, output_dir)?;
    output::execute(&scenario, &dir, threads)
}
