//! File formats, run artifacts, the external-simulator adapter and the
//! `dyncal` command line on top of [`dyncal_core`].

pub mod artifacts;
pub mod cli;
pub mod config;
pub mod error;
pub mod external;
pub mod io;

pub use dyncal_core as core;
pub use error::CliError;
pub use external::{ExternalConfig, ExternalSimulator};
