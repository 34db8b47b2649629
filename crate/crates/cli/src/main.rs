//! `thinwg`: forward simulation, resonance scans and core identification.
//!
//! Exit codes: 0 success, 1 computation failure (including a failed
//! pipeline stage or self-test), 2 invalid usage or configuration,
//! 3 I/O or file-format error.

mod cli;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use thinwg_core::Error;

use cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", message(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let Some(mut err) = e.chain().find_map(|c| c.downcast_ref::<Error>()) else {
        return 1;
    };
    while let Error::Stage { source, .. } = err {
        err = source;
    }
    match err {
        Error::Config(_) | Error::Geometry(_) | Error::Domain { .. } => 2,
        Error::Io { .. } | Error::Schema { .. } | Error::MissingFrequency { .. } => 3,
        _ => 1,
    }
}

/// The error chain, skipping causes whose text the previous message already shows.
fn message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}
