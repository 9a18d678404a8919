//! Files, command line and experiment harness around `actlearn-core`.
//!
//! - [`config`]: the JSON run configuration and the built-in studies.
//! - [`snapshot_file`]: binary snapshot format with a CSV mirror.
//! - [`model`]: persisted surrogates.
//! - [`harness`]: truth comparisons, sampling comparisons, timings.
//! - [`commands`]: the CLI verbs as functions.

pub mod commands;
pub mod config;
pub mod error;
pub mod harness;
pub mod model;
pub mod report;
pub mod runtime;
pub mod sampling;
pub mod snapshot_file;

pub use config::{Overrides, RunConfig};
pub use error::{CliError, FormatError};
