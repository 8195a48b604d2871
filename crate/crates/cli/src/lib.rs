//! Command-line front end: `sample`, `fit`, `experiment` and `tables`.
//!
//! Every output carries a [`manifest::RunManifest`]; passing it back through
//! `--config` reruns the command with the same result.

pub mod args;
pub mod commands;
pub mod error;
pub mod format;
pub mod manifest;

pub use args::Cli;
pub use commands::run;
pub use error::CliError;
