mod args;
mod commands;
mod settings;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Failure;
use settings::Settings;

fn run(cli: Cli) -> Result<(), Failure> {
    let settings = |common, var, values| Settings::resolve(common, var, values).map_err(Failure::Usage);
    match &cli.command {
        Command::Rate(common) => commands::rate(&settings(common, None, None)?),
        Command::Sweep(sweep) => commands::sweep(&settings(
            &sweep.common,
            sweep.variable.as_deref(),
            sweep.values.as_deref(),
        )?),
        Command::Simulate(common) => commands::simulate(&settings(common, None, None)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
