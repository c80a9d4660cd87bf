//! Prequential error metrics and corpus-level summaries.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Targets with `|y|` at or below this are rejected by [`mape`].
pub const EPSILON_GUARD: f64 = 1e-8;

/// Mean absolute percent error over all entries, in percent.
pub fn mape(y_hat: &Matrix, y: &Matrix) -> Result<f64> {
    mape_guarded(y_hat, y, EPSILON_GUARD)
}

pub fn mape_guarded(y_hat: &Matrix, y: &Matrix, guard: f64) -> Result<f64> {
    check_shapes(y_hat, y)?;
    let mut total = 0.0;
    for (index, (&p, &t)) in y_hat.as_slice().iter().zip(y.as_slice()).enumerate() {
        if t.is_nan() || libm::fabs(t) <= guard {
            return Err(Error::NearZeroTarget { index, value: t });
        }
        total += libm::fabs((p - t) / t);
    }
    Ok(100.0 * total / y.as_slice().len() as f64)
}

pub fn mse(y_hat: &Matrix, y: &Matrix) -> Result<f64> {
    check_shapes(y_hat, y)?;
    let total: f64 = y_hat.as_slice().iter().zip(y.as_slice()).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(total / y.as_slice().len() as f64)
}

fn check_shapes(y_hat: &Matrix, y: &Matrix) -> Result<()> {
    if y_hat.rows() != y.rows() || y_hat.cols() != y.cols() {
        return Err(Error::DimensionMismatch {
            what: "prediction shape",
            expected: y.as_slice().len(),
            found: y_hat.as_slice().len(),
        });
    }
    if y.as_slice().is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(())
}

/// Per-batch error used to compare the learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ErrorMetric {
    #[default]
    Mape,
    Mse,
}

impl ErrorMetric {
    pub fn eval(self, y_hat: &Matrix, y: &Matrix) -> Result<f64> {
        match self {
            ErrorMetric::Mape => mape(y_hat, y),
            ErrorMetric::Mse => mse(y_hat, y),
        }
    }
}

impl core::str::FromStr for ErrorMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mape" => Ok(ErrorMetric::Mape),
            "mse" => Ok(ErrorMetric::Mse),
            _ => Err(Error::InvalidConfig("metric must be mape or mse")),
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (`n − 1` denominator); zero for a single value.
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return if n == 1 { 0.0 } else { f64::NAN };
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    libm::sqrt(ss / (n - 1) as f64)
}

/// Linear-interpolation quantile of sorted data (the `(n−1)p` rule).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = libm::ceil(pos) as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Box-plot statistics of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistributionSummary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl DistributionSummary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(DistributionSummary {
            n: sorted.len(),
            min: sorted[0],
            q1: quantile_sorted(&sorted, 0.25),
            median: quantile_sorted(&sorted, 0.5),
            q3: quantile_sorted(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
            mean: mean(&sorted),
        })
    }
}

/// One algorithm's result on one stream.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StreamScore {
    pub stream_id: String,
    /// Mean of the per-batch MAPE of the emitted predictions, in percent.
    pub mean_mape: f64,
    pub reset_indices: Vec<usize>,
}

/// Corpus statistics for one algorithm: mean and sample sd of per-stream MAPE.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunSummary {
    pub algorithm: String,
    pub n_streams: usize,
    pub mean: f64,
    pub sd: f64,
    pub total_resets: usize,
}

pub fn summarize(algorithm: &str, scores: &[StreamScore]) -> Result<RunSummary> {
    if scores.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let values: Vec<f64> = scores.iter().map(|s| s.mean_mape).collect();
    Ok(RunSummary {
        algorithm: algorithm.into(),
        n_streams: scores.len(),
        mean: mean(&values),
        sd: sample_sd(&values),
        total_resets: scores.iter().map(|s| s.reset_indices.len()).sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn mape_arithmetic() {
        let y = Matrix::column(&[100.0]);
        assert_eq!(mape(&y, &y).unwrap(), 0.0);
        assert!((mape(&Matrix::column(&[101.0]), &y).unwrap() - 1.0).abs() < 1e-12);
        let y2 = Matrix::column(&[100.0, 200.0]);
        let p2 = Matrix::column(&[102.0, 196.0]);
        assert!((mape(&p2, &y2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mape_guards_zero_targets() {
        let y = Matrix::column(&[100.0, 1e-9]);
        assert!(matches!(mape(&y, &y), Err(Error::NearZeroTarget { index: 1, .. })));
    }

    #[test]
    fn mse_arithmetic() {
        let y = Matrix::column(&[1.0, 2.0]);
        let p = Matrix::column(&[2.0, 4.0]);
        assert_eq!(mse(&p, &y).unwrap(), 2.5);
        assert!(mse(&p, &Matrix::column(&[1.0])).is_err());
    }

    fn score(id: &str, m: f64) -> StreamScore {
        StreamScore { stream_id: id.into(), mean_mape: m, reset_indices: vec![] }
    }

    #[test]
    fn summary_conventions() {
        let one = summarize("al", &[score("a", 1.0)]).unwrap();
        assert_eq!((one.mean, one.sd), (1.0, 0.0));
        let two = summarize("al", &[score("a", 1.0), score("b", 3.0)]).unwrap();
        assert_eq!(two.mean, 2.0);
        assert!((two.sd - libm::sqrt(2.0)).abs() < 1e-12);
        assert!(summarize("al", &[]).is_err());
    }

    #[test]
    fn quartiles_interpolate() {
        let s = DistributionSummary::from_values(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((s.min, s.q1, s.median, s.q3, s.max, s.mean), (1.0, 2.0, 3.0, 4.0, 5.0, 3.0));
        let s = DistributionSummary::from_values(&[0.7]).unwrap();
        assert_eq!((s.n, s.min, s.median, s.max), (1, 0.7, 0.7, 0.7));
    }
}
