//! IO, configuration and the command-line runner for `coulombgas-core`.

pub mod config;
pub mod io;
pub mod run;
