//! Test-then-train protocol shared by every algorithm: each batch is predicted
//! before its labels are handed to the learner.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::stream::Stream;

/// Which learner produced the emitted prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Selector {
    /// Online random-feature network.
    L1,
    /// Linear fallback.
    L2,
    /// Frozen batch network.
    Static,
}

impl Selector {
    pub fn as_str(self) -> &'static str {
        match self {
            Selector::L1 => "L1",
            Selector::L2 => "L2",
            Selector::Static => "static",
        }
    }
}

impl core::str::FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L1" => Ok(Selector::L1),
            "L2" => Ok(Selector::L2),
            "static" => Ok(Selector::Static),
            _ => Err(Error::InvalidConfig("unknown selector")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ResetCause {
    /// The queue met the reset rule.
    Alternation,
    /// An online update lost positive definiteness; the long learners were
    /// rebuilt from the short window.
    NumericalBreakdown,
}

/// Output of the predict half of a step. Must be handed back to
/// [`PrequentialLearner::learn`] before the next batch is predicted.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Stream index of the first sample in the batch.
    pub index: usize,
    pub emitted: Matrix,
    /// Short-memory prediction, for algorithms that keep one.
    pub short: Option<Matrix>,
    pub selector: Selector,
}

/// Everything observed at one step.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRecord {
    /// Stream index of the first sample in the batch.
    pub index: usize,
    /// Row-major `b × k` labels and emitted predictions.
    pub y_true: Vec<f64>,
    pub y_pred: Vec<f64>,
    /// Error of the emitted (long-memory) prediction.
    pub err_l: f64,
    pub err_s: Option<f64>,
    pub q_bit: Option<bool>,
    pub reset: bool,
    pub reset_cause: Option<ResetCause>,
    pub selector: Selector,
    /// Start of the long window after this step.
    pub t0: usize,
}

pub trait PrequentialLearner {
    /// Predicts a batch using only what has been learned so far.
    fn predict(&self, xb: &Matrix) -> Result<Prediction>;

    /// Consumes the labels of the batch predicted by `prediction`.
    fn learn(&mut self, prediction: Prediction, xb: &Matrix, yb: &Matrix) -> Result<StepRecord>;

    /// Number of samples consumed so far, initial data included.
    fn position(&self) -> usize;

    fn step(&mut self, xb: &Matrix, yb: &Matrix) -> Result<StepRecord> {
        let p = self.predict(xb)?;
        self.learn(p, xb, yb)
    }
}

/// Feeds `stream[start..]` to `learner` in batches of `batch` samples (the
/// last one may be shorter).
pub fn run_prequential<L: PrequentialLearner + ?Sized>(
    learner: &mut L,
    stream: &Stream,
    start: usize,
    batch: usize,
) -> Result<Vec<StepRecord>> {
    if batch == 0 {
        return Err(Error::InvalidConfig("batch size must be >= 1"));
    }
    let mut records = Vec::with_capacity(stream.len().saturating_sub(start) / batch + 1);
    let mut lo = start;
    while lo < stream.len() {
        let hi = (lo + batch).min(stream.len());
        let (xb, yb) = stream.slice(lo, hi);
        records.push(learner.step(&xb, &yb)?);
        lo = hi;
    }
    Ok(records)
}

/// Mean per-batch MAPE of the emitted predictions, and the reset indices.
pub fn score_records(records: &[StepRecord]) -> Result<(f64, Vec<usize>)> {
    let mut errs = Vec::with_capacity(records.len());
    for r in records {
        errs.push(crate::metrics::mape(&Matrix::column(&r.y_pred), &Matrix::column(&r.y_true))?);
    }
    let resets = records.iter().filter(|r| r.reset).map(|r| r.index).collect();
    Ok((crate::metrics::mean(&errs), resets))
}
