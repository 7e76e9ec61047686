//! Configuration loading and command execution behind the `nhdyn` binary.

pub mod config;
pub mod run;

pub use config::{load_config, parse_config, RunConfig};
pub use run::{run, Command, RunReport, THRESHOLDS};
