//! Experiment harness for `chaoscast-core`: TOML experiment and suite files,
//! CSV and JSON artifacts, training-time measurement and the benchmark presets.

pub mod config;
pub mod csv;
pub mod error;
pub mod experiment;
pub mod presets;
pub mod suite;

pub use config::{ExperimentConfig, Method, MethodOverrides, Split, Suite};
pub use error::{Error, Result};
pub use experiment::{fit_and_forecast, generate, run_experiment, time_training, ExperimentReport, SavedModel};
pub use suite::{run_suite, SuiteEntry};
