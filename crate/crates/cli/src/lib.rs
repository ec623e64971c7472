//! Command-line driver and JSON service for the valuation pipeline.

pub mod args;
pub mod commands;
pub mod server;

pub use args::Cli;
pub use commands::{run, CliError};
