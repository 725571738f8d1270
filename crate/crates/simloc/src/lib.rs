//! Command-line runner for the simplex Anderson model.
//!
//! Wraps `simloc-core` with parallel ensembles, strict JSON configuration,
//! CSV output with a manifest, and the verification suites.

pub mod checks;
pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use cli::run_command;
pub use config::RunConfig;
pub use error::CliError;
