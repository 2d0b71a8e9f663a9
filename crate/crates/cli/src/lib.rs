//! Library surface of the command-line harness: spec parsing, the three
//! pipelines, and deterministic output formatting. The `feedsolve` binary
//! is a thin wrapper over these modules.

pub mod error;
pub mod output;
pub mod run;
pub mod spec;

pub use error::CliError;
