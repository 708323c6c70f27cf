use thiserror::Error;

use crate::io::ReadError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error(transparent)]
    Core(#[from] lpfilter_core::Error),
    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Write(std::io::Error::other(e))
    }
}

fn core_exit_code(e: &lpfilter_core::Error) -> i32 {
    if e.is_numeric() {
        3
    } else if e.is_data() {
        2
    } else {
        1
    }
}

impl CliError {
    /// 1 usage, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Read(ReadError::Series(e)) => core_exit_code(e),
            CliError::Read(_) | CliError::Write(_) => 2,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}
