//! Scenario runner for the qubit-pointer time-of-flight momentum
//! measurement: configuration files, CSV formats, the `tofq` command line
//! and the cross-module invariant checks behind `tofq oracle-check`.

pub mod checks;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use config::ScenarioConfig;
pub use error::CliError;
