//! Command-line harness of the variable annuity pricer: experiment files,
//! presets, sweeps, exercise-region export and machine-readable results.

pub mod cli;
pub mod config;
pub mod error;
pub mod run;

pub use config::{Experiment, ExperimentConfig, Method, Overrides, Preset, SweepParameter, Violation};
pub use error::CliError;
pub use run::{PriceOutput, ResultRecord, SweepRow};
