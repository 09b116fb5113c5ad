//! Experiment driver for the restricted ternary counting library: config
//! parsing, end-to-end runs, and report emission. The `goldbach` binary is a
//! thin clap front-end over this crate.

pub mod config;
pub mod report;

pub use config::{basis_from_q0, parse_m_range, ExperimentConfig, RunOptions};
pub use report::{emit_csv, emit_json, report_to_json, rows_to_csv, run_experiment, RunReport};
