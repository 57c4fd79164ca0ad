//! Command-line front end: textual automaton documents, built-in models,
//! line-oriented reports and the subcommand dispatcher.

pub mod commands;
pub mod format;
pub mod models;
pub mod report;

pub use commands::run_command;
