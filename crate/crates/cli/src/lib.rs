//! Library side of the `fraclab` command-line tool: configuration, the
//! subcommands and the lemma verification suites.

pub mod commands;
pub mod config;
pub mod error;
pub mod verify;

pub use config::Config;
pub use error::CliError;
