//! Online-sequential random-feature network: output weights and the inverse
//! Gram are updated recursively, so no sample history is stored.
//!
//! For matched ridge `λ` the recursion reproduces the batch solution over all
//! absorbed samples: after any split of the data into an initial block and
//! sequential batches, `beta` equals `(HᵀH + λI)⁻¹HᵀY`.

use alloc::sync::Arc;

use crate::error::{Error, Result};
use crate::feature_map::HiddenLayer;
use crate::matrix::Matrix;
use crate::numerics::{ridge_fit, InverseGram};

/// Updates between periodic symmetry and positive-definiteness checks.
pub const HEALTH_CHECK_INTERVAL: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OselmState {
    layer: Arc<HiddenLayer>,
    beta: Matrix,
    inverse_gram: InverseGram,
    absorbed: usize,
    updates: u64,
}

impl OselmState {
    /// Batch fit on the initial block; also keeps `(H0ᵀH0 + λI)⁻¹` for the recursion.
    pub fn init(layer: Arc<HiddenLayer>, x0: &Matrix, y0: &Matrix, lambda: f64) -> Result<Self> {
        if x0.rows() == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let h0 = layer.map_features(x0)?;
        let (beta, inverse_gram) = ridge_fit(&h0, y0, lambda)?;
        Ok(OselmState { layer, beta, inverse_gram, absorbed: x0.rows(), updates: 0 })
    }

    /// Reinitializes from a short window. Identical to [`OselmState::init`];
    /// named separately because it is how the long-memory learner forgets.
    pub fn warm_restart(layer: Arc<HiddenLayer>, xw: &Matrix, yw: &Matrix, lambda: f64) -> Result<Self> {
        Self::init(layer, xw, yw, lambda)
    }

    /// Restores a state from its parts.
    pub fn from_parts(layer: Arc<HiddenLayer>, beta: Matrix, inverse_gram: InverseGram, absorbed: usize) -> Result<Self> {
        let k = layer.width();
        if beta.rows() != k || inverse_gram.dim() != k {
            return Err(Error::DimensionMismatch { what: "oselm state width", expected: k, found: beta.rows() });
        }
        Ok(OselmState { layer, beta, inverse_gram, absorbed, updates: 0 })
    }

    /// Absorbs a batch of `b` samples:
    /// `R ← R − R Hᵀ(I + H R Hᵀ)⁻¹ H R`, then `β ← β + R Hᵀ(Y − Hβ)`.
    pub fn update(&mut self, xb: &Matrix, yb: &Matrix) -> Result<()> {
        if xb.rows() != yb.rows() {
            return Err(Error::DimensionMismatch { what: "update targets", expected: xb.rows(), found: yb.rows() });
        }
        if yb.cols() != self.beta.cols() {
            return Err(Error::DimensionMismatch { what: "update outputs", expected: self.beta.cols(), found: yb.cols() });
        }
        if xb.rows() == 0 {
            return Ok(());
        }
        let h = self.layer.map_features(xb)?;
        let next_r = crate::numerics::smw_update(&self.inverse_gram, &h)?;
        let residual = yb.sub(&h.matmul(&self.beta)?)?;
        let gain = next_r.matrix().matmul(&h.t_matmul(&residual)?)?;
        let next_beta = self.beta.add(&gain)?;
        if !next_beta.is_finite() {
            return Err(Error::NumericalBreakdown);
        }
        self.inverse_gram = next_r;
        self.beta = next_beta;
        self.absorbed += xb.rows();
        self.updates += 1;
        if self.updates.is_multiple_of(HEALTH_CHECK_INTERVAL) {
            self.check_health()?;
        }
        Ok(())
    }

    /// Re-symmetrizes `R` and verifies it is still positive definite.
    pub fn check_health(&mut self) -> Result<()> {
        let r = InverseGram::from_matrix(self.inverse_gram.matrix().clone())?;
        if !r.is_positive_definite() {
            return Err(Error::NumericalBreakdown);
        }
        self.inverse_gram = r;
        Ok(())
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

    pub fn inverse_gram(&self) -> &InverseGram {
        &self.inverse_gram
    }

    /// Samples absorbed since the last (re)initialization.
    pub fn absorbed(&self) -> usize {
        self.absorbed
    }
}
