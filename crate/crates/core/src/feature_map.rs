//! The fixed random hidden layer shared by the long- and short-memory
//! networks, plus the frozen input standardization applied before it.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Activation {
    #[default]
    Sigmoid,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => {
                // Split on sign so exp never overflows.
                if z >= 0.0 {
                    1.0 / (1.0 + libm::exp(-z))
                } else {
                    let e = libm::exp(z);
                    e / (1.0 + e)
                }
            }
            Activation::Tanh => libm::tanh(z),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }
}

impl core::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            _ => Err(Error::InvalidConfig("activation must be sigmoid or tanh")),
        }
    }
}

/// Everything needed to re-derive a [`HiddenLayer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LayerSpec {
    pub input_dim: usize,
    pub width: usize,
    pub seed: u64,
    pub activation: Activation,
}

/// Random input weights (`width × input_dim`) and biases, drawn once from
/// Uniform[−1, 1] with a seeded ChaCha8 stream and never changed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "LayerSpec", into = "LayerSpec"))]
pub struct HiddenLayer {
    spec: LayerSpec,
    weights: Matrix,
    biases: Vec<f64>,
}

impl HiddenLayer {
    pub fn new(spec: LayerSpec) -> Result<Self> {
        if spec.input_dim == 0 || spec.width == 0 {
            return Err(Error::InvalidConfig("hidden layer needs input_dim >= 1 and width >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let weights = Matrix::from_fn(spec.width, spec.input_dim, |_, _| rng.random_range(-1.0..=1.0));
        let biases = (0..spec.width).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Ok(HiddenLayer { spec, weights, biases })
    }

    /// Builds a layer from explicit parameters. Its recorded seed is 0, so a
    /// snapshot of it will not round-trip.
    pub fn from_parts(weights: Matrix, biases: Vec<f64>, activation: Activation) -> Result<Self> {
        if biases.len() != weights.rows() {
            return Err(Error::DimensionMismatch { what: "layer biases", expected: weights.rows(), found: biases.len() });
        }
        let spec = LayerSpec { input_dim: weights.cols(), width: weights.rows(), seed: 0, activation };
        Ok(HiddenLayer { spec, weights, biases })
    }

    pub fn spec(&self) -> LayerSpec {
        self.spec
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    pub fn width(&self) -> usize {
        self.spec.width
    }

    pub fn activation(&self) -> Activation {
        self.spec.activation
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// Hidden-layer output matrix: entry `(n, i)` is `G(w_i · x_n + b_i)`.
    pub fn map_features(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.spec.input_dim {
            return Err(Error::DimensionMismatch { what: "feature map inputs", expected: self.spec.input_dim, found: x.cols() });
        }
        let g = self.spec.activation;
        let mut h = Matrix::zeros(x.rows(), self.spec.width);
        for n in 0..x.rows() {
            let xn = x.row(n);
            for (i, out) in h.row_mut(n).iter_mut().enumerate() {
                *out = g.apply(dot(self.weights.row(i), xn) + self.biases[i]);
            }
        }
        Ok(h)
    }
}

impl TryFrom<LayerSpec> for HiddenLayer {
    type Error = Error;

    fn try_from(spec: LayerSpec) -> Result<Self> {
        HiddenLayer::new(spec)
    }
}

impl From<HiddenLayer> for LayerSpec {
    fn from(layer: HiddenLayer) -> Self {
        layer.spec
    }
}

/// Per-column z-score transform, fitted once and then frozen.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    /// Column means and population standard deviations of `x`. Columns with
    /// zero spread get unit scale.
    pub fn fit(x: &Matrix) -> Result<Self> {
        let n = x.rows();
        if n == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let d = x.cols();
        let mut mean = alloc::vec![0.0; d];
        for i in 0..n {
            for (m, v) in mean.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = alloc::vec![0.0; d];
        for i in 0..n {
            for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = libm::sqrt(s / n as f64);
                if sd > 1e-12 { sd } else { 1.0 }
            })
            .collect();
        Ok(Standardizer { mean, scale })
    }

    pub fn identity(d: usize) -> Self {
        Standardizer { mean: alloc::vec![0.0; d], scale: alloc::vec![1.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::DimensionMismatch { what: "standardizer inputs", expected: self.mean.len(), found: x.cols() });
        }
        Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| (x[(i, j)] - self.mean[j]) / self.scale[j]))
    }

    pub fn inverse_transform(&self, z: &Matrix) -> Result<Matrix> {
        if z.cols() != self.mean.len() {
            return Err(Error::DimensionMismatch { what: "standardizer outputs", expected: self.mean.len(), found: z.cols() });
        }
        Ok(Matrix::from_fn(z.rows(), z.cols(), |i, j| z[(i, j)] * self.scale[j] + self.mean[j]))
    }
}
