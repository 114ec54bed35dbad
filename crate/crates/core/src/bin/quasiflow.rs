use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quasiflow::cli;

#[derive(Parser)]
#[command(name = "quasiflow", version, about = "Semiclassical quasi-flow experiments for nonlinear oscillators")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipelines of a config
    Run { config: PathBuf },
    /// Check a config without running numerics
    Validate { config: PathBuf },
    /// Print the config schema (JSON Schema)
    Schema,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match args.command {
        Command::Run { config } => cli::run_command(&config),
        Command::Validate { config } => cli::validate_command(&config),
        Command::Schema => {
            println!("{}", cli::config_schema());
            cli::EXIT_OK
        }
    };
    ExitCode::from(code as u8)
}
