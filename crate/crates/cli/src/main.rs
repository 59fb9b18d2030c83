use std::process::ExitCode;

use clap::Parser;
use enn_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match enn_cli::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
