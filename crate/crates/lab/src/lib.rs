//! Experiment harness behind the `cbi-lab` binary.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::ExperimentConfig;
pub use experiments::{run, Experiment};
pub use report::{Check, Report, Table};
