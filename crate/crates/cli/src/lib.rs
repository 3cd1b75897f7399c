//! Batch runner for the bv-sharp toolkit: flat configs in, JSON summaries
//! and CSV tables out.

pub mod config;
pub mod error;
pub mod tasks;

pub use config::{parse_config, ExperimentConfig, RawConfig, Target, Task};
pub use error::{CliError, Result};
pub use tasks::{csv_columns, execute, run, write_report, Report, SCHEMA_VERSION};
