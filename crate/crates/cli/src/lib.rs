//! Command-line runner and HTTP tile service for `henonlab`.
//!
//! Every batch subcommand writes one artifact and a JSON run manifest next
//! to it. Exit status 0 means success, 2 a rejected input and 3 an
//! exhausted budget.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod manifest;
pub mod serve;
pub mod tiles;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HENONLAB_THREADS";

/// Reads [`THREADS_ENV`]; `Ok(None)` when unset.
pub fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got {v:?}")),
        },
    }
}
