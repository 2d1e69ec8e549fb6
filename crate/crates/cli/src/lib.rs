//! Command-line front end: argument parsing, subcommands and report formats
//! for the `evcond` binary.

pub mod args;
pub mod commands;
pub mod report;
pub mod svg;

pub use commands::{execute, Verdict};

/// Environment variable that caps the number of simulation workers.
pub const THREADS_ENV: &str = "EVCOND_THREADS";
