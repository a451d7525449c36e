use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

mod config;
mod suites;

use config::RunConfig;
use suites::{suites, SuiteError};

/// Numerical verification suites for Riesz transforms on ax+b groups.
#[derive(Debug, Parser)]
#[command(name = "axb", version)]
struct Cli {
    /// One of: haar, hardy, kernels, opnorms, profiles, schrodinger, weak11.
    command: String,
    #[command(flatten)]
    config: RunConfig,
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let Ok(suite) = suites().get(&cli.command) else {
        return usage(&format!("unknown command `{}`; expected one of {}", cli.command, suites().list().join(", ")));
    };
    let out = match suite.run(&cli.config) {
        Ok(o) => o,
        Err(SuiteError::Usage(m)) => return usage(&m),
        Err(SuiteError::Failed(m)) => {
            eprintln!("failed: {m}");
            return ExitCode::from(1);
        }
    };
    let summary = json!({
        "command": cli.command,
        "config": cli.config,
        "pass": out.pass,
        "metrics": out.metrics,
    });
    let summary = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    let csv = out.table.to_csv();
    match &cli.config.out {
        Some(path) => {
            let parent = path.parent().filter(|d| !d.as_os_str().is_empty());
            let written = parent
                .map_or(Ok(()), std::fs::create_dir_all)
                .and_then(|_| std::fs::write(path, &csv))
                .and_then(|_| std::fs::write(path.with_extension("json"), &summary));
            if let Err(e) = written {
                eprintln!("failed: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }
    if out.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
