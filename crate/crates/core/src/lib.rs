//! Alternating long/short-memory online regression on top of random-feature
//! networks, with the baselines and synthetic drift streams used to evaluate it.
//!
//! `no_std` with `alloc`. File formats, the CLI and parallel corpus runs live
//! in the companion `alternating` crate.

#![no_std]

extern crate alloc;

pub mod algorithms;
pub mod controller;
pub mod drift_sim;
pub mod elm;
pub mod error;
pub mod experiment;
pub mod feature_map;
pub mod linear;
pub mod matrix;
pub mod metrics;
pub mod monitor;
pub mod numerics;
pub mod oselm;
pub mod prequential;
pub mod stream;

pub use algorithms::{run_algorithm, Algorithm};
pub use controller::{run_stream, Controller, ControllerConfig};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use prequential::{PrequentialLearner, StepRecord};
pub use stream::Stream;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
