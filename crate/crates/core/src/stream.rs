use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A labeled time series: row `t` of `inputs` pairs with row `t` of `targets`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stream {
    inputs: Matrix,
    targets: Matrix,
}

impl Stream {
    pub fn new(inputs: Matrix, targets: Matrix) -> Result<Self> {
        if inputs.rows() != targets.rows() {
            return Err(Error::DimensionMismatch { what: "stream targets", expected: inputs.rows(), found: targets.rows() });
        }
        Ok(Stream { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.targets.cols()
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn targets(&self) -> &Matrix {
        &self.targets
    }

    /// Rows `start..end` as an `(X, Y)` pair.
    pub fn slice(&self, start: usize, end: usize) -> (Matrix, Matrix) {
        (self.inputs.slice_rows(start, end), self.targets.slice_rows(start, end))
    }
}
