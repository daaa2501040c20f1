use std::path::PathBuf;

use clap::Parser;
use ksblow_cli::{run_cli, Command};

/// Blow-up numerics for the radial Keller-Segel system.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, short)]
    verbose: bool,
}

fn main() {
    let a = Args::parse();
    std::process::exit(run_cli(a.command, a.config.as_deref(), &a.out, a.verbose));
}
