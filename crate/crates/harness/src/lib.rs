//! Experiment runner for the MCES sampler: configuration files, bundled data sets,
//! the benchmark experiments and their CSV outputs.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod experiments;
pub mod output;
pub mod theorem;

pub use config::{Experiment, ExperimentSpec};
pub use error::{HarnessError, Result};
pub use experiments::{run_experiment, ExperimentResult};
