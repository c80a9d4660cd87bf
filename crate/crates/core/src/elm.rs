//! Batch-trained random-feature network: closed-form output weights over a
//! block of samples. Used for the short-memory learner and for width selection.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::feature_map::{Activation, HiddenLayer, LayerSpec};
use crate::matrix::Matrix;
use crate::metrics::mape;
use crate::numerics::{ridge_solve, DEFAULT_RIDGE};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ElmModel {
    layer: Arc<HiddenLayer>,
    beta: Matrix,
    trained_on: usize,
}

impl ElmModel {
    /// Output weights `β = ridge_solve(H(X), Y, λ)`.
    pub fn train(layer: Arc<HiddenLayer>, x: &Matrix, y: &Matrix, lambda: f64) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let h = layer.map_features(x)?;
        let beta = ridge_solve(&h, y, lambda)?;
        Ok(ElmModel { layer, beta, trained_on: x.rows() })
    }

    /// Wraps given output weights, e.g. restored from a snapshot.
    pub fn from_weights(layer: Arc<HiddenLayer>, beta: Matrix, trained_on: usize) -> Result<Self> {
        if beta.rows() != layer.width() {
            return Err(Error::DimensionMismatch { what: "output weights rows", expected: layer.width(), found: beta.rows() });
        }
        Ok(ElmModel { layer, beta, trained_on })
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        self.layer.map_features(x)?.matmul(&self.beta)
    }

    pub fn layer(&self) -> &Arc<HiddenLayer> {
        &self.layer
    }

    pub fn beta(&self) -> &Matrix {
        &self.beta
    }

    pub fn trained_on(&self) -> usize {
        self.trained_on
    }
}

/// Free-function form of [`ElmModel::train`].
pub fn train_batch(layer: Arc<HiddenLayer>, x: &Matrix, y: &Matrix, lambda: f64) -> Result<ElmModel> {
    ElmModel::train(layer, x, y, lambda)
}

pub const DEFAULT_WIDTH_GRID: [usize; 5] = [10, 20, 30, 50, 80];

/// Repeated contiguous-block cross-validation over candidate hidden widths.
///
/// Folds are consecutive time blocks. Each repeat draws a fresh random layer
/// (seed `seed + repeat`), so repeats measure sensitivity to the draw rather
/// than to the split.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthSearch {
    pub candidates: Vec<usize>,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub lambda: f64,
    pub activation: Activation,
}

impl Default for WidthSearch {
    fn default() -> Self {
        WidthSearch {
            candidates: DEFAULT_WIDTH_GRID.to_vec(),
            folds: 5,
            repeats: 3,
            seed: 0,
            lambda: DEFAULT_RIDGE,
            activation: Activation::Sigmoid,
        }
    }
}

impl WidthSearch {
    /// Mean validation MAPE per candidate, in candidate order.
    pub fn scores(&self, x: &Matrix, y: &Matrix) -> Result<Vec<f64>> {
        if self.candidates.is_empty() || self.candidates.contains(&0) {
            return Err(Error::InvalidConfig("width candidates must be nonempty and positive"));
        }
        if self.folds < 2 || self.repeats == 0 {
            return Err(Error::InvalidConfig("cross-validation needs folds >= 2 and repeats >= 1"));
        }
        let n = x.rows();
        if y.rows() != n {
            return Err(Error::DimensionMismatch { what: "cv targets", expected: n, found: y.rows() });
        }
        if n < 2 * self.folds {
            return Err(Error::InsufficientData { needed: 2 * self.folds, got: n });
        }
        let bounds: Vec<(usize, usize)> =
            (0..self.folds).map(|f| (f * n / self.folds, (f + 1) * n / self.folds)).collect();

        let mut scores = Vec::with_capacity(self.candidates.len());
        for &width in &self.candidates {
            let mut total = 0.0;
            for r in 0..self.repeats {
                let layer = Arc::new(HiddenLayer::new(LayerSpec {
                    input_dim: x.cols(),
                    width,
                    seed: self.seed.wrapping_add(r as u64),
                    activation: self.activation,
                })?);
                for &(lo, hi) in &bounds {
                    let train_x = x.slice_rows(0, lo).vstack(&x.slice_rows(hi, n))?;
                    let train_y = y.slice_rows(0, lo).vstack(&y.slice_rows(hi, n))?;
                    let model = ElmModel::train(layer.clone(), &train_x, &train_y, self.lambda)?;
                    let pred = model.predict(&x.slice_rows(lo, hi))?;
                    total += mape(&pred, &y.slice_rows(lo, hi))?;
                }
            }
            scores.push(total / (self.repeats * self.folds) as f64);
        }
        Ok(scores)
    }

    /// Width with the lowest mean validation MAPE; ties go to the smaller width.
    pub fn select(&self, x: &Matrix, y: &Matrix) -> Result<usize> {
        let scores = self.scores(x, y)?;
        let mut best = (self.candidates[0], scores[0]);
        for (&w, &s) in self.candidates.iter().zip(&scores).skip(1) {
            if s < best.1 || (s == best.1 && w < best.0) || (best.1.is_nan() && !s.is_nan()) {
                best = (w, s);
            }
        }
        Ok(best.0)
    }
}
