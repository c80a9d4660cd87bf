//! Ridge least squares and the recursive inverse-Gram update shared by the
//! online learners.
//!
//! Convention: design rows are samples, columns are features; target rows
//! align with design rows.

use crate::error::{Error, Result};
use crate::matrix::{Cholesky, HouseholderQr, Matrix};

/// Ridge constant used when a caller does not choose one.
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Largest batch handled by a single Woodbury step. Bigger batches are
/// absorbed in consecutive chunks of this size.
pub const MAX_INNER_BATCH: usize = 64;

/// `(HᵀH + λI)⁻¹` for the samples absorbed so far. Kept symmetric.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct InverseGram(Matrix);

impl InverseGram {
    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// Wraps an existing matrix after checking it is square and symmetrizing it.
    pub fn from_matrix(mut m: Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch { what: "inverse Gram square", expected: m.rows(), found: m.cols() });
        }
        m.symmetrize();
        Ok(InverseGram(m))
    }

    /// True if every Cholesky pivot is strictly positive.
    pub fn is_positive_definite(&self) -> bool {
        Cholesky::factor(&self.0).is_ok()
    }

    /// Absorbs the rows of `hb` into the inverse via the Woodbury identity.
    pub fn update(&mut self, hb: &Matrix) -> Result<()> {
        *self = smw_update(self, hb)?;
        Ok(())
    }
}

/// Factors `[H; √λ I]` once; both the ridge solution and the inverse Gram
/// come from the triangular factor.
fn factor_ridge(h: &Matrix, lambda: f64) -> Result<HouseholderQr> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidConfig("ridge lambda must be finite and >= 0"));
    }
    let (n, k) = (h.rows(), h.cols());
    if k == 0 {
        return Err(Error::DimensionMismatch { what: "design columns", expected: 1, found: 0 });
    }
    if lambda == 0.0 && n < k {
        return Err(Error::Singular);
    }
    let aug = if lambda > 0.0 {
        let mut a = Matrix::zeros(n + k, k);
        for i in 0..n {
            a.row_mut(i).copy_from_slice(h.row(i));
        }
        let s = libm::sqrt(lambda);
        for j in 0..k {
            a[(n + j, j)] = s;
        }
        a
    } else {
        h.clone()
    };
    let qr = HouseholderQr::factor(aug);
    if qr.is_rank_deficient() {
        return Err(Error::Singular);
    }
    Ok(qr)
}

/// `argmin_β ‖Hβ − Y‖² + λ‖β‖²`, i.e. `(HᵀH + λI)⁻¹HᵀY`.
///
/// Solved by QR on the ridge-augmented system rather than the normal
/// equations. With `lambda = 0` a rank-deficient `H` yields [`Error::Singular`].
pub fn ridge_solve(h: &Matrix, y: &Matrix, lambda: f64) -> Result<Matrix> {
    check_targets(h, y)?;
    let qr = factor_ridge(h, lambda)?;
    Ok(solve_augmented(&qr, h, y, lambda))
}

fn check_targets(h: &Matrix, y: &Matrix) -> Result<()> {
    if h.rows() != y.rows() {
        return Err(Error::DimensionMismatch { what: "ridge target rows", expected: h.rows(), found: y.rows() });
    }
    if h.rows() == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(())
}

fn solve_augmented(qr: &HouseholderQr, h: &Matrix, y: &Matrix, lambda: f64) -> Matrix {
    let extra = if lambda > 0.0 { h.cols() } else { 0 };
    let mut rhs = Matrix::zeros(h.rows() + extra, y.cols());
    for i in 0..y.rows() {
        rhs.row_mut(i).copy_from_slice(y.row(i));
    }
    qr.solve(&rhs)
}

/// `(H0ᵀH0 + λI)⁻¹`.
pub fn init_inverse_gram(h0: &Matrix, lambda: f64) -> Result<InverseGram> {
    if h0.rows() == 0 && lambda == 0.0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let qr = factor_ridge(h0, lambda)?;
    Ok(InverseGram(qr.inverse_gram()))
}

/// Ridge weights together with the matching inverse Gram, from one factorization.
pub(crate) fn ridge_fit(h: &Matrix, y: &Matrix, lambda: f64) -> Result<(Matrix, InverseGram)> {
    check_targets(h, y)?;
    let qr = factor_ridge(h, lambda)?;
    Ok((solve_augmented(&qr, h, y, lambda), InverseGram(qr.inverse_gram())))
}

/// `R − R Hbᵀ (I + Hb R Hbᵀ)⁻¹ Hb R`, symmetrized.
///
/// The inner `b×b` system is solved by Cholesky; a failed factorization is a
/// [`Error::NumericalBreakdown`]. Batches above [`MAX_INNER_BATCH`] rows are
/// absorbed chunk by chunk.
pub fn smw_update(r: &InverseGram, hb: &Matrix) -> Result<InverseGram> {
    let k = r.dim();
    if hb.cols() != k {
        return Err(Error::DimensionMismatch { what: "update columns", expected: k, found: hb.cols() });
    }
    if hb.rows() > MAX_INNER_BATCH {
        let mut cur = r.clone();
        let mut start = 0;
        while start < hb.rows() {
            let end = (start + MAX_INNER_BATCH).min(hb.rows());
            cur = smw_step(&cur, &hb.slice_rows(start, end))?;
            start = end;
        }
        return Ok(cur);
    }
    smw_step(r, hb)
}

fn smw_step(r: &InverseGram, hb: &Matrix) -> Result<InverseGram> {
    let b = hb.rows();
    if b == 0 {
        return Ok(r.clone());
    }
    // P = R Hbᵀ (K×b); R symmetric so Pᵀ = Hb R.
    let p = r.0.matmul_t(hb)?;
    let mut inner = hb.matmul(&p)?;
    for i in 0..b {
        inner[(i, i)] += 1.0;
    }
    inner.symmetrize();
    let chol = Cholesky::factor(&inner)?;
    let x = chol.solve(&p.transpose())?;
    let mut next = r.0.sub(&p.matmul(&x)?)?;
    next.symmetrize();
    if !next.is_finite() {
        return Err(Error::NumericalBreakdown);
    }
    Ok(InverseGram(next))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_design_returns_targets() {
        let h = Matrix::identity(2);
        let y = Matrix::column(&[1.0, 2.0]);
        let beta = ridge_solve(&h, &y, 0.0).unwrap();
        assert!(beta.max_abs_diff(&y) < 1e-15);
    }

    #[test]
    fn single_column_fits_mean() {
        let h = Matrix::column(&[1.0, 1.0]);
        let y = Matrix::column(&[1.0, 3.0]);
        let beta = ridge_solve(&h, &y, 0.0).unwrap();
        assert!((beta[(0, 0)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rank_deficient_without_ridge_is_singular() {
        let h = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]);
        let y = Matrix::column(&[1.0, 2.0, 3.0]);
        assert_eq!(ridge_solve(&h, &y, 0.0).unwrap_err(), Error::Singular);
        assert!(ridge_solve(&h, &y, 1e-6).is_ok());
        let under = Matrix::from_rows(&[[1.0, 0.0, 0.5]]);
        assert_eq!(ridge_solve(&under, &Matrix::column(&[1.0]), 0.0).unwrap_err(), Error::Singular);
    }

    #[test]
    fn negative_lambda_rejected() {
        let h = Matrix::identity(2);
        assert!(matches!(ridge_solve(&h, &h, -1.0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn inverse_gram_of_identity_and_of_pure_ridge() {
        let g = init_inverse_gram(&Matrix::identity(4), 0.0).unwrap();
        assert!(g.matrix().max_abs_diff(&Matrix::identity(4)) < 1e-15);
        let g = init_inverse_gram(&Matrix::zeros(3, 4), 1.0).unwrap();
        assert!(g.matrix().max_abs_diff(&Matrix::identity(4)) < 1e-15);
    }

    #[test]
    fn zero_row_leaves_inverse_unchanged() {
        let h0 = Matrix::from_rows(&[[1.0, 0.5], [0.2, 2.0], [0.3, 0.3]]);
        let r = init_inverse_gram(&h0, 1e-6).unwrap();
        let r2 = smw_update(&r, &Matrix::zeros(1, 2)).unwrap();
        assert_eq!(r, r2);
    }

    #[test]
    fn update_rejects_wrong_width() {
        let r = init_inverse_gram(&Matrix::identity(3), 0.0).unwrap();
        assert!(matches!(smw_update(&r, &Matrix::zeros(1, 2)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn large_batches_are_chunked() {
        let h0 = Matrix::from_fn(5, 3, |i, j| ((i * 3 + j) as f64 * 0.37).sin());
        let extra = Matrix::from_fn(150, 3, |i, j| ((i * 7 + j * 3) as f64 * 0.11).cos());
        let r = init_inverse_gram(&h0, 1e-3).unwrap();
        let chunked = smw_update(&r, &extra).unwrap();
        let direct = init_inverse_gram(&h0.vstack(&extra).unwrap(), 1e-3).unwrap();
        assert!(chunked.matrix().max_abs_diff(direct.matrix()) < 1e-9);
    }
}
