use std::process::ExitCode;

use clap::Parser;
use toposval::cli::{render, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let text = render(&outcome.report, cli.format);
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("{}", serde_json::json!({ "error": format!("{}: {e}", path.display()) }));
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::from(2)
        }
    }
}
