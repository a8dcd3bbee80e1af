//! Command-line front end for `reward-axioms`: argument parsing, parallel
//! drivers, expectation manifests and report rendering.

pub mod cli;
pub mod manifest;
pub mod parallel;
pub mod run;

pub use cli::{parse_config, parse_config_text, ConfigError, ExperimentConfig};
pub use run::{execute, render, run, Report, RunOutcome};
