//! Library surface behind the `orbitword` binary: flat key=value run
//! configuration, the row-based verification report with its JSON/CSV/table
//! projections, the five verification suites, and the one-shot subcommand
//! implementations.

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;
