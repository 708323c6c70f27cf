use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use lpfilter_cli::{run, Cli, CliError, RunConfig};

fn execute(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    let out = run(&cfg)?;
    match &cfg.output {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            out.table.write(&mut file)?;
            file.flush()?;
        }
        None => out.table.write(io::stdout().lock())?,
    }
    if let Some(summary) = out.summary {
        eprintln!("{summary}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.render().to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("{first}");
            return ExitCode::from(1);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
