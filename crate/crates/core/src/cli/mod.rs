//! Batch driver: TOML configs in, CSV/JSON tables and a JSON report out.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical or convergence
//! failure (including a failed sanity check), 3 I/O failure.

pub mod config;
pub mod pipeline;

use std::path::Path;

pub use config::{config_schema, load_config, parse_config, RunConfig};
pub use pipeline::{run, ExitReport, OUTPUT_DIR_ENV};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Validation(_) | Error::Configuration(_) => EXIT_VALIDATION,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

/// The `validate` verb: findings on stdout, one per line.
pub fn validate_command(path: &Path) -> i32 {
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            println!("{e}");
            return exit_code(&e);
        }
    };
    let findings = cfg.validate();
    if findings.is_empty() {
        println!("ok");
        EXIT_OK
    } else {
        for f in &findings {
            println!("{f}");
        }
        EXIT_VALIDATION
    }
}

/// The `run` verb: report JSON on stdout, errors on stderr.
pub fn run_command(path: &Path) -> i32 {
    let cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return exit_code(&e);
        }
    };
    let findings = cfg.validate();
    if !findings.is_empty() {
        for f in &findings {
            eprintln!("{f}");
        }
        return EXIT_VALIDATION;
    }
    match run(&cfg, path) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            if report.all_passed() {
                EXIT_OK
            } else {
                eprintln!("sanity check failed");
                EXIT_NUMERICAL
            }
        }
        Err(e) => {
            eprintln!("{e}");
            exit_code(&e)
        }
    }
}
