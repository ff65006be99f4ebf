//! Stage functions behind the `lif` command.

pub mod app;
pub mod error;
pub mod stages;
pub mod workspace;

pub use error::{CliError, CliResult};
