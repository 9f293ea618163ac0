//! Library side of the `reorder` command-line tool.

pub mod commands;
pub mod config;
pub mod svg;

pub use commands::Report;
pub use config::{Overrides, RunConfig};
