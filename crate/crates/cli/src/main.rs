use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = cfslab_cli::Cli::parse();
    match cfslab_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
