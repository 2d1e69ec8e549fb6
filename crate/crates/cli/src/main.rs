use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use evcond_cli::args::Cli;
use evcond_cli::{execute, THREADS_ENV};

fn thread_cap() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("{THREADS_ENV}={v:?} is not a thread count")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = thread_cap().and_then(|cap| execute(cli, cap, &mut out).map_err(|e| e.to_string()));
    let _ = out.flush();
    match result {
        Ok(verdict) => ExitCode::from(verdict.code()),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
