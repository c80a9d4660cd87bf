//! Grid evaluation of the alternating controller over a corpus.

use alloc::vec::Vec;

use crate::controller::{run_stream, ControllerConfig};
use crate::error::{Error, Result};
use crate::metrics::DistributionSummary;
use crate::prequential::score_records;
use crate::stream::Stream;

/// One `(δ, W)` cell: per-stream mean MAPE in corpus order plus its summary.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridCell {
    pub delta: f64,
    pub window: usize,
    pub per_stream: Vec<f64>,
    pub summary: DistributionSummary,
}

/// Runs the controller with `delta` and `window` substituted into `base` on
/// every stream.
pub fn evaluate_cell(base: &ControllerConfig, delta: f64, window: usize, corpus: &[Stream]) -> Result<GridCell> {
    if corpus.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let cfg = ControllerConfig { delta, window, ..base.clone() };
    cfg.validate()?;
    let per_stream = corpus
        .iter()
        .map(|s| score_records(&run_stream(&cfg, s)?).map(|(m, _)| m))
        .collect::<Result<Vec<_>>>()?;
    let summary = DistributionSummary::from_values(&per_stream)?;
    Ok(GridCell { delta, window, per_stream, summary })
}

/// All cells of `delta_values × window_values`, δ-major. Cells are independent.
pub fn sensitivity_grid(
    base: &ControllerConfig,
    delta_values: &[f64],
    window_values: &[usize],
    corpus: &[Stream],
) -> Result<Vec<GridCell>> {
    if delta_values.is_empty() || window_values.is_empty() {
        return Err(Error::InvalidConfig("sensitivity grid axes must be nonempty"));
    }
    let mut cells = Vec::with_capacity(delta_values.len() * window_values.len());
    for &d in delta_values {
        for &w in window_values {
            cells.push(evaluate_cell(base, d, w, corpus)?);
        }
    }
    Ok(cells)
}
