//! Configuration, orchestration and file output for the `qpreduce` command-line tool.

pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod spectral;

pub use error::{CliError, Result};
