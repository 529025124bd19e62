//! File formats, configuration and the command-line front end for the
//! `cie-core` explainer.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod load;

pub use error::{CliError, Result};
