use clap::Parser;
use hidaprop_cli::args::Cli;
use std::process::ExitCode;

fn main() -> ExitCode {
    match hidaprop_cli::commands::run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
