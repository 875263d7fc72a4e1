//! Experiment driver: TOML configuration, parallel runs and CSV output.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod driver;
pub mod output;

pub use config::{load_config, parse_config, ConfigError, ExperimentSpec, FieldExport, Scenario};
pub use driver::{calibrate_threshold, run_experiment, ExperimentResult, RunRecord};
pub use output::{read_metrics, write_experiment, MetricsRow, METRICS_HEADER};
