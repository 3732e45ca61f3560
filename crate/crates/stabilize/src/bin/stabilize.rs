use std::process::ExitCode;

use clap::Parser;
use stabilize::cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
