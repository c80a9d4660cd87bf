//! Versioned JSON snapshots of models, configs and stream specs.
//!
//! Hidden layers are stored as their seed spec and regenerated on load, so a
//! layer built with `HiddenLayer::from_parts` does not survive a round trip.

use std::path::Path;

use alternating_core::drift_sim::StreamSpec;
use alternating_core::elm::ElmModel;
use alternating_core::feature_map::HiddenLayer;
use alternating_core::linear::LinearModel;
use alternating_core::oselm::OselmState;
use alternating_core::ControllerConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SNAPSHOT_FORMAT: &str = "alternating-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

/// A type that can be written as a snapshot under a fixed kind tag.
pub trait Snapshottable: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

impl Snapshottable for ElmModel {
    const KIND: &'static str = "elm_model";
}
impl Snapshottable for OselmState {
    const KIND: &'static str = "oselm_state";
}
impl Snapshottable for LinearModel {
    const KIND: &'static str = "linear_model";
}
impl Snapshottable for HiddenLayer {
    const KIND: &'static str = "hidden_layer";
}
impl Snapshottable for ControllerConfig {
    const KIND: &'static str = "controller_config";
}
impl Snapshottable for StreamSpec {
    const KIND: &'static str = "stream_spec";
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope<T> {
    format: String,
    version: u32,
    kind: String,
    payload: T,
}

pub fn to_json<T: Snapshottable>(value: &T) -> Result<String> {
    let env = Envelope { format: SNAPSHOT_FORMAT.into(), version: SNAPSHOT_VERSION, kind: T::KIND.into(), payload: value };
    Ok(serde_json::to_string_pretty(&env)?)
}

/// Checks format, version and kind before decoding the payload.
pub fn from_json<T: Snapshottable>(text: &str) -> Result<T> {
    let env: Envelope<serde_json::Value> = serde_json::from_str(text)?;
    let bad = |msg: String| Error::Format { path: "<snapshot>".into(), msg };
    if env.format != SNAPSHOT_FORMAT {
        return Err(bad(format!("not a snapshot (format {:?})", env.format)));
    }
    if env.version != SNAPSHOT_VERSION {
        return Err(bad(format!("unsupported snapshot version {}", env.version)));
    }
    if env.kind != T::KIND {
        return Err(bad(format!("snapshot holds {:?}, expected {:?}", env.kind, T::KIND)));
    }
    Ok(serde_json::from_value(env.payload)?)
}

pub fn save<T: Snapshottable>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?).map_err(Error::io(path))
}

pub fn load<T: Snapshottable>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    from_json(&text).map_err(|e| match e {
        Error::Format { msg, .. } => Error::Format { path: path.to_path_buf(), msg },
        other => other,
    })
}
