//! Configuration, CSV output and subcommands behind the `spad-ofdm` binary.

pub mod commands;
pub mod config;
pub mod csv_out;
