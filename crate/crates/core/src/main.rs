use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = agreeset::cli::Cli::parse();
    match agreeset::cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
