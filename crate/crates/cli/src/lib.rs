//! Front end for `kitaev-core`: sweeps, correlation profiles, scaling fits
//! and phase diagrams written as CSV and JSON.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

pub use args::Cli;
pub use commands::{run, run_with_env, Outcome, OUTPUT_DIR_VAR};
