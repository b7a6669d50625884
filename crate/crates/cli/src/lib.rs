//! Experiment orchestration for the `mcd` command-line tool.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::ExperimentConfig;
pub use experiment::{auto_fractions, run_experiment, ExperimentOutput};
