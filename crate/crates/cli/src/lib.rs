//! Command-line front end: configuration parsing, experiment dispatch and artifact output.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run_experiment, Outcome};
pub use config::{parse_config, Command, ExperimentConfig};
pub use error::CliError;

use std::path::Path;

/// Loads the config (or defaults) and runs it. Returns the process exit code.
pub fn run_cli(command: Command, config: Option<&Path>, out: &Path, verbose: bool) -> i32 {
    let result = load(command, config).and_then(|cfg| run_experiment(&cfg, out, verbose));
    match result {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::BlowUp) => 2,
        Err(e) => {
            let report = e.report();
            if let Ok(s) = serde_json::to_string(&report) {
                eprintln!("{s}");
            }
            if std::fs::create_dir_all(out).is_ok() {
                let _ = output::write_json(&out.join("error.json"), &report);
            }
            1
        }
    }
}

pub fn load(command: Command, config: Option<&Path>) -> Result<ExperimentConfig, CliError> {
    let text = match config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    parse_config(&text, command).map_err(CliError::Config)
}
