//! Library surface of the command line driver, split out so integration
//! tests can exercise config parsing and the command pipelines directly.

// Negated range guards like !(x > 0.0) also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod json;
pub mod sweep;

pub use commands::{CommandError, Format, OutputOptions};
pub use config::{parse_config, ConfigError, InitialProfile, RunConfig};
