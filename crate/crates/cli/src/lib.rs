//! Experiment driver for the `lagvar` estimators: configuration, runs over
//! seeds, result files and comparison tables.

pub mod config;
pub mod error;
pub mod experiment;
pub mod report;

pub use config::{parse_bandwidth, parse_seeds, ExperimentConfig, ExperimentKind, Settings};
pub use error::{CliError, Result};
pub use experiment::{run_experiment, Summary};
pub use report::{compare_report, compare_summaries, summary_table, Comparison};
