//! File formats and the `fiberframe` command-line tool for `fiberframe-core`.

pub mod commands;
pub mod io;
pub mod report;

pub use commands::run;
