//! Command-line front end for `admm-mcp-core`: instance files, solve runs
//! with trace output, and success-rate sweeps.

pub mod commands;
pub mod error;
pub mod io;
pub mod sweep;

pub use commands::{exec, run, Cli, ManifestCommand, RunManifest};
pub use error::{CliError, CliResult};
pub use sweep::{run_sweep, SweepPlan, SweepRecord};
