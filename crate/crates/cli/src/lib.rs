//! The `hidaprop` command line: argument grammar, configuration echo, exit
//! codes, the verification suites and the subcommand drivers.

pub mod args;
pub mod commands;
pub mod config;
pub mod failure;
pub mod simplex;
pub mod suites;
