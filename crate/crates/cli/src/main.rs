use std::process::ExitCode;

use clap::Parser;
use mzi_cli::args::Cli;
use mzi_cli::commands;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(report) => {
            for line in &report.violations {
                eprintln!("mzi: {line}");
            }
            ExitCode::from(report.exit_kind().code())
        }
        Err(e) => {
            eprintln!("mzi: {e}");
            ExitCode::from(e.kind.code())
        }
    }
}
