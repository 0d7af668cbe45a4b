//! Command-line front end for `ionqrm-core`: configuration parsing, command
//! dispatch and output rendering.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ConfigError, Document, RunConfig, SCHEMA_VERSION};
pub use run::{run, CliError, RunOutput};
