use std::io;
use std::process::ExitCode;

use clap::Parser;
use kbp_cli::{run, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let code = run(&config, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
