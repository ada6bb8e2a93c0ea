//! Experiment harness for the seminorm / typicality / coordination library:
//! config-driven runs with deterministic seeds and CSV/JSON artifacts.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{ExperimentConfig, OutputFormat};
pub use runner::{run, run_to_string, RunFailure, RunOutcome};
