use std::process::ExitCode;

use algebroid_loc_cli::{execute, render, Cli, EXIT_USAGE};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, code) = execute(&cli);
    print!("{}", render(&report));
    if let Some(path) = &cli.common.report {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(path, json + "\n") {
            eprintln!("cannot write report to {}: {e}", path.display());
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    ExitCode::from(code as u8)
}
