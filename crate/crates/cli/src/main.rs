use std::process::ExitCode;

use clap::Parser;
use uwbcap_cli::Cli;

fn main() -> ExitCode {
    uwbcap_cli::run(Cli::parse())
}
