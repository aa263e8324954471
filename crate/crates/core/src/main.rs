use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use oplab::cli::{self, selftest, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "oplab", version, about = "Blaschke products, similarity witnesses and power-bounded counterexamples")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario and write its reports plus manifest.json.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = "oplab-out")]
        out: PathBuf,
        /// Workers for independent scan rows.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Run the built-in example suite and print a per-module table.
    Selftest,
    /// Carleson constant of the given zeros (`re` or `re,im`).
    Carleson {
        /// Zeros as `re` or `re,im`; attach a leading negative pair with `=`,
        /// as in `--zeros=-0.2,0.6 0.5`. May be repeated.
        #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true, action = clap::ArgAction::Append)]
        zeros: Vec<String>,
        #[arg(long, default_value = "oplab-out")]
        out: PathBuf,
    },
}

fn zero_to_json(s: &str) -> Result<serde_json::Value, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let parse = |p: &str| p.parse::<f64>().map_err(|e| CliError::Input(format!("zero `{s}`: {e}")));
    match parts.as_slice() {
        [re] => Ok(serde_json::json!(parse(re)?)),
        [re, im] => Ok(serde_json::json!([parse(re)?, parse(im)?])),
        _ => Err(CliError::Input(format!("zero `{s}` must be `re` or `re,im`"))),
    }
}

fn report(result: Result<cli::Manifest, CliError>, out: &std::path::Path) -> ExitCode {
    match result {
        Ok(m) => {
            println!("{}: all {} certificates passed; reports in {}", m.command, m.certificates.len(), out.display());
            ExitCode::from(cli::EXIT_OK as u8)
        }
        Err(e) => {
            eprintln!("oplab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_INPUT } else { cli::EXIT_OK } as u8);
        }
    };
    match args.command {
        Command::Run { scenario, out, parallel } => {
            let opts = RunOptions { out: out.clone(), parallel: parallel.max(1) };
            report(cli::run_scenario(&scenario, &opts), &out)
        }
        Command::Selftest => {
            let (table, ok) = selftest::selftest_report();
            print!("{table}");
            ExitCode::from(if ok { cli::EXIT_OK } else { cli::EXIT_CERTIFICATE } as u8)
        }
        Command::Carleson { zeros, out } => {
            let result = zeros.iter().map(|z| zero_to_json(z)).collect::<Result<Vec<_>, _>>().and_then(|zs| {
                let text = serde_json::json!({"command": "carleson", "params": {"zeros": zs}}).to_string();
                cli::run_scenario_text(&text, &RunOptions { out: out.clone(), parallel: 1 })
            });
            report(result, &out)
        }
    }
}
