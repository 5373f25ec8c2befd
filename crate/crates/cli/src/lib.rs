//! Command-line driver: presets, run configuration, CSV and manifest output.

pub mod commands;
pub mod config;
pub mod error;
pub mod run;
pub mod table;

pub use config::{Preset, RunConfig};
pub use error::CliError;
