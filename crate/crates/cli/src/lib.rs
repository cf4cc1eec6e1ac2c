//! Experiment harness behind the `pwtest` binary: configuration, seeded
//! trial execution, aggregation and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod runner;

pub use config::{RunConfig, TesterKind};
pub use runner::{run, sweep, Procedure, RunOutput, RunSummary, TrialRecord};
