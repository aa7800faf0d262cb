//! Batch front end: subcommands over body specs with seeded, reproducible
//! JSON or CSV reports.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::run;
pub use config::{Cli, Command, Format, RunConfig};
pub use output::Report;
