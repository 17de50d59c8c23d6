//! Command-line front end for `toricsim-core`: configuration, file formats and
//! the command drivers behind the `toricsim` binary.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
