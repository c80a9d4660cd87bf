//! Recursive ridge regression on `[1, x]`, the simple long-memory learner
//! used while the long window is too short for the random-feature network.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numerics::{ridge_fit, smw_update, InverseGram};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearModel {
    /// `(d+1) × k`, intercept in row 0.
    weights: Matrix,
    inverse_gram: InverseGram,
    absorbed: usize,
}

fn augment(x: &Matrix) -> Matrix {
    Matrix::from_fn(x.rows(), x.cols() + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] })
}

impl LinearModel {
    pub fn fit(x: &Matrix, y: &Matrix, lambda: f64) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let (weights, inverse_gram) = ridge_fit(&augment(x), y, lambda)?;
        Ok(LinearModel { weights, inverse_gram, absorbed: x.rows() })
    }

    pub fn from_parts(weights: Matrix, inverse_gram: InverseGram, absorbed: usize) -> Result<Self> {
        if inverse_gram.dim() != weights.rows() {
            return Err(Error::DimensionMismatch { what: "linear inverse Gram", expected: weights.rows(), found: inverse_gram.dim() });
        }
        Ok(LinearModel { weights, inverse_gram, absorbed })
    }

    /// Same recursion as the online network, on the augmented linear design.
    pub fn update(&mut self, xb: &Matrix, yb: &Matrix) -> Result<()> {
        if xb.rows() != yb.rows() {
            return Err(Error::DimensionMismatch { what: "update targets", expected: xb.rows(), found: yb.rows() });
        }
        if xb.cols() + 1 != self.weights.rows() {
            return Err(Error::DimensionMismatch { what: "linear inputs", expected: self.weights.rows() - 1, found: xb.cols() });
        }
        if xb.rows() == 0 {
            return Ok(());
        }
        let a = augment(xb);
        let next_r = smw_update(&self.inverse_gram, &a)?;
        let residual = yb.sub(&a.matmul(&self.weights)?)?;
        let next_w = self.weights.add(&next_r.matrix().matmul(&a.t_matmul(&residual)?)?)?;
        if !next_w.is_finite() {
            return Err(Error::NumericalBreakdown);
        }
        self.inverse_gram = next_r;
        self.weights = next_w;
        self.absorbed += xb.rows();
        Ok(())
    }

    pub fn predict(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() + 1 != self.weights.rows() {
            return Err(Error::DimensionMismatch { what: "linear inputs", expected: self.weights.rows() - 1, found: x.cols() });
        }
        augment(x).matmul(&self.weights)
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn inverse_gram(&self) -> &InverseGram {
        &self.inverse_gram
    }

    pub fn absorbed(&self) -> usize {
        self.absorbed
    }
}
