//! Experiment configuration: TOML file format, flag overlay, validation.

use std::path::{Path, PathBuf};

use alternating_core::drift_sim::{NoiseParams, DEFAULT_ETA_NOISE, DEFAULT_SIGMA_Y_REL, DEFAULT_STREAM_LEN};
use alternating_core::monitor::PairedRegistration;
use alternating_core::{Algorithm, ControllerConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

pub const SWEEP_DELTAS: [f64; 6] = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7];
pub const SWEEP_WINDOWS: [usize; 3] = [20, 30, 40];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub n_abrupt: usize,
    pub n_gradual: usize,
    pub base_seed: u64,
    pub length: usize,
    pub eta_noise_sigma: f64,
    pub sigma_y_rel: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            n_abrupt: 20,
            n_gradual: 20,
            base_seed: 7,
            length: DEFAULT_STREAM_LEN,
            eta_noise_sigma: DEFAULT_ETA_NOISE,
            sigma_y_rel: DEFAULT_SIGMA_Y_REL,
        }
    }
}

impl CorpusConfig {
    pub fn noise(&self) -> NoiseParams {
        NoiseParams { eta_noise_sigma: self.eta_noise_sigma, sigma_y_rel: self.sigma_y_rel }
    }

    pub fn size(&self) -> usize {
        self.n_abrupt + self.n_gradual
    }
}

/// `(δ, W)` grid for the sensitivity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Also run the sweep as part of `run`.
    pub enabled: bool,
    pub deltas: Vec<f64>,
    pub windows: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { enabled: false, deltas: SWEEP_DELTAS.to_vec(), windows: SWEEP_WINDOWS.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub algorithms: Vec<Algorithm>,
    pub paired_registration: PairedRegistration,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses all available cores. Never affects outputs.
    pub threads: usize,
    /// Write one record CSV per (algorithm, stream).
    pub write_records: bool,
    /// Run on this stream CSV instead of a generated corpus.
    pub stream_csv: Option<PathBuf>,
    pub corpus: CorpusConfig,
    pub controller: ControllerConfig,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            version: CONFIG_VERSION,
            algorithms: Algorithm::ALL.to_vec(),
            paired_registration: PairedRegistration::default(),
            output_dir: PathBuf::from("results"),
            threads: 0,
            write_records: true,
            stream_csv: None,
            corpus: CorpusConfig::default(),
            controller: ControllerConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Keys present in `file_text` replace the corresponding values of
    /// `self` (defaults with command-line flags already applied).
    pub fn overlay_file(&self, file_text: &str) -> Result<Self> {
        let overlay: toml::Table = toml::from_str(file_text).map_err(|e| Error::Config(e.to_string()))?;
        let mut base = toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut base, overlay);
        let merged: ExperimentConfig =
            toml::Value::Table(base).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        merged.validate()?;
        Ok(merged)
    }

    pub fn overlay_path(&self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        self.overlay_file(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version)));
        }
        if self.algorithms.is_empty() {
            return bad("algorithms must not be empty");
        }
        let mut seen = self.algorithms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            return bad("algorithms must not repeat");
        }
        self.controller.validate().map_err(|e| Error::Config(e.to_string()))?;
        let c = &self.corpus;
        if self.stream_csv.is_none() {
            if c.size() == 0 {
                return bad("corpus must contain at least one stream");
            }
            if c.length <= self.controller.initial_len() {
                return bad("corpus length must exceed the initial data length");
            }
            if c.length < 40 {
                return bad("drifting streams need length >= 40");
            }
        }
        if !(c.eta_noise_sigma >= 0.0 && c.eta_noise_sigma.is_finite() && c.sigma_y_rel >= 0.0 && c.sigma_y_rel.is_finite()) {
            return bad("noise levels must be finite and >= 0");
        }
        let s = &self.sweep;
        if s.deltas.is_empty() || s.windows.is_empty() {
            return bad("sweep grids must not be empty");
        }
        for &d in &s.deltas {
            ControllerConfig { delta: d, ..self.controller.clone() }.validate().map_err(|e| Error::Config(format!("sweep delta {d}: {e}")))?;
        }
        for &w in &s.windows {
            ControllerConfig { window: w, ..self.controller.clone() }.validate().map_err(|e| Error::Config(format!("sweep window {w}: {e}")))?;
        }
        Ok(())
    }
}
