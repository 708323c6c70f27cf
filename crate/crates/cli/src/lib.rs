//! CSV front end for `lpfilter-core`: input parsing, flag handling and the
//! subcommands of the `lpfilter` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use commands::{run, CommandOutput};
pub use config::{Cli, RunConfig};
pub use error::CliError;
pub use io::{read_series_csv, read_series_path, series_table, NumberFormat, ReadError, Table};
