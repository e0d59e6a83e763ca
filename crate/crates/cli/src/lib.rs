//! Command-line front end for the damped-oscillator propagators: run
//! configurations, time-series CSV, oracle comparisons and the identity
//! suites.

pub mod commands;
pub mod config;
pub mod error;

pub use config::{ConfigFile, Method, RunConfig, TimeGrid};
pub use error::{CliError, CliResult, Status};
