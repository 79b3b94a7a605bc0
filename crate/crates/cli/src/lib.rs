//! Library half of the `planar-mqc` command-line tool: file formats and
//! subcommand implementations, kept callable for integration tests.

pub mod commands;
pub mod formats;

pub use commands::{exit_code, CliError, CliResult};
