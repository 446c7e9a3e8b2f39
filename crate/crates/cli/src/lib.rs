//! Configuration, commands and the acceptance suite behind the `limsup` binary.
pub mod commands;
pub mod config;
pub mod oracle;
pub mod suite;
