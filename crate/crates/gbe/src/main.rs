use std::process::ExitCode;

use clap::Parser;
use gbe::cli::{run, RunConfig};

fn main() -> ExitCode {
    match run(RunConfig::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gbe: {e}");
            ExitCode::FAILURE
        }
    }
}
