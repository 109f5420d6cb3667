//! Command-line front end: benchmark suites, stateless suggest/observe, and
//! reports over round logs.

pub mod commands;
pub mod config;
pub mod csvio;
mod error;
pub mod format;

pub use error::{CliError, Result};
