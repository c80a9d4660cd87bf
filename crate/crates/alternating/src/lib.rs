//! File formats, parallel corpus runs and the command-line front end for
//! `alternating-core`.

pub mod config;
pub mod error;
pub mod formats;
pub mod runner;
pub mod snapshot;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
