//! Config-driven batch runs of the `modmetric` checks.
//!
//! A run reads one JSON config (space, modular, task, sampling plan), checks
//! it completely, runs the task and emits a report whose header echoes the
//! resolved config. Exit codes: 0 when everything passed, 1 when a check
//! found violations or the solver did not converge, 2 for config or input
//! errors.

pub mod config;
pub mod report;
pub mod run;

pub use config::{load_config, parse_config, prepare, Command, ConfigError, Format, Prepared, RunConfig};
pub use report::Report;
pub use run::run;
