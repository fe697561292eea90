//! Command-line harness for the IRS stealth optimizer: configuration,
//! sweeps over the array size, sample count and spatial frequency, echo
//! simulation, and deterministic CSV/JSON output.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{run, Command};
pub use config::ExperimentConfig;
pub use error::CliError;
