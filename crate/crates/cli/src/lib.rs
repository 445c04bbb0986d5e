//! File formats and command implementations for the `postal-rps` binary.
//!
//! - [`config`]: the JSON match/tournament configuration.
//! - [`trace_file`]: JSON-lines traces and their SHA-256 digest.
//! - [`registry_file`]: the checksummed federation registry document.
//! - [`commands`]: `play`, `tournament`, `attack`, `rankings`, `register`.

pub mod commands;
pub mod config;
pub mod registry_file;
pub mod trace_file;

pub use postal_rps_core as core;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const ABORTED: i32 = 2;
    pub const UNDETECTED: i32 = 3;
}
