//! Library side of the `lfrps` command-line tool.

pub mod commands;
pub mod dataset;
pub mod error;
pub mod report;

pub use error::{CliError, CliResult};
