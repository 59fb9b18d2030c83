//! Command-line front end for the `enn` library.
//!
//! Exit codes: 0 success, 1 an experiment threshold failed, 2 a usage,
//! config or input error, 3 a numerical failure during training.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod model;
pub mod table;

use args::{Cli, Command};
pub use error::{CliError, Result};

pub fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict_cmd(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::Experiment(a) => commands::experiment(a),
    }
}
