//! Command-line front end and HTTP session service over `qgen-core`.

pub mod cli;
pub mod config;
mod error;
pub mod server;
pub mod store;

pub use error::CliError;
