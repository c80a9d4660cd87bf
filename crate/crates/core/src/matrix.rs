//! Dense row-major `f64` matrices and the two factorizations the learners need:
//! Cholesky for small symmetric positive definite systems and Householder QR
//! for (ridge-augmented) least squares.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix buffer",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally long rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    /// Single column from a slice.
    pub fn column(values: &[f64]) -> Self {
        Matrix { rows: values.len(), cols: 1, data: values.to_vec() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    /// Copy of rows `start..end`.
    pub fn slice_rows(&self, start: usize, end: usize) -> Matrix {
        assert!(start <= end && end <= self.rows);
        Matrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Appends the rows of `other` below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows > 0 && other.rows > 0 && self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                what: "vstack columns",
                expected: self.cols,
                found: other.cols,
            });
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(Matrix { rows: self.rows + other.rows, cols, data })
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                what: "matmul inner dimension",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let o = out.row_mut(i);
            for (p, &aip) in a.iter().enumerate() {
                if aip == 0.0 {
                    continue;
                }
                for (oj, &b) in o.iter_mut().zip(other.row(p)) {
                    *oj += aip * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                what: "transposed matmul rows",
                expected: self.rows,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        for r in 0..self.rows {
            let a = self.row(r);
            let b = other.row(r);
            for (i, &ari) in a.iter().enumerate() {
                if ari == 0.0 {
                    continue;
                }
                for (oj, &bj) in out.row_mut(i).iter_mut().zip(b) {
                    *oj += ari * bj;
                }
            }
        }
        Ok(out)
    }

    /// `self · otherᵀ`.
    pub fn matmul_t(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                what: "matmul with transpose columns",
                expected: self.cols,
                found: other.cols,
            });
        }
        Ok(Matrix::from_fn(self.rows, other.rows, |i, j| dot(self.row(i), other.row(j))))
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                what: "elementwise shape",
                expected: self.data.len(),
                found: other.data.len(),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| libm::fabs(a - b)).fold(0.0, f64::max)
    }

    /// Largest `|a_ij - a_ji|` of a square matrix.
    pub fn max_asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                worst = worst.max(libm::fabs(self[(i, j)] - self[(j, i)]));
            }
        }
        worst
    }

    /// Replaces a square matrix by `(A + Aᵀ)/2`.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                let m = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = m;
                self[(j, i)] = m;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: Matrix,
}

impl Cholesky {
    /// Factors a symmetric matrix, reading only its lower triangle. Fails with
    /// [`Error::NumericalBreakdown`] on a non-positive pivot.
    pub fn factor(a: &Matrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch { what: "cholesky square", expected: n, found: a.cols() });
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for p in 0..j {
                d -= l[(j, p)] * l[(j, p)];
            }
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::NumericalBreakdown);
            }
            let d = libm::sqrt(d);
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for p in 0..j {
                    s -= l[(i, p)] * l[(j, p)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Cholesky { lower: l })
    }

    /// Diagonal of the factor; all strictly positive by construction.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.lower.rows()).map(|i| self.lower[(i, i)]).collect()
    }

    /// Solves `A X = B` for every column of `B`.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        let n = self.lower.rows();
        if b.rows() != n {
            return Err(Error::DimensionMismatch { what: "cholesky rhs rows", expected: n, found: b.rows() });
        }
        let l = &self.lower;
        let mut x = b.clone();
        for c in 0..x.cols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for p in 0..i {
                    s -= l[(i, p)] * x[(p, c)];
                }
                x[(i, c)] = s / l[(i, i)];
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for p in i + 1..n {
                    s -= l[(p, i)] * x[(p, c)];
                }
                x[(i, c)] = s / l[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.lower.rows();
        let mut inv = self.solve(&Matrix::identity(n)).expect("square identity rhs");
        inv.symmetrize();
        inv
    }
}

/// Householder QR of a tall matrix (`rows >= cols`), kept in compact form.
#[derive(Debug, Clone)]
pub(crate) struct HouseholderQr {
    /// `R` in the upper triangle, Householder vectors below the diagonal.
    qr: Matrix,
    /// Leading coefficient of each reflector.
    tau: Vec<f64>,
    diag: Vec<f64>,
}

impl HouseholderQr {
    pub(crate) fn factor(mut a: Matrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        debug_assert!(m >= n);
        let mut tau = vec![0.0; n];
        let mut diag = vec![0.0; n];
        for j in 0..n {
            let mut norm = 0.0;
            for i in j..m {
                norm += a[(i, j)] * a[(i, j)];
            }
            let norm = libm::sqrt(norm);
            if norm == 0.0 {
                tau[j] = 0.0;
                diag[j] = 0.0;
                continue;
            }
            let alpha = if a[(j, j)] > 0.0 { -norm } else { norm };
            // v = x - alpha e1, stored scaled so that v[0] = 1.
            let v0 = a[(j, j)] - alpha;
            for i in j + 1..m {
                a[(i, j)] /= v0;
            }
            tau[j] = -v0 / alpha;
            diag[j] = alpha;
            for c in j + 1..n {
                let mut s = a[(j, c)];
                for i in j + 1..m {
                    s += a[(i, j)] * a[(i, c)];
                }
                s *= tau[j];
                a[(j, c)] -= s;
                for i in j + 1..m {
                    let vij = a[(i, j)];
                    a[(i, c)] -= s * vij;
                }
            }
            a[(j, j)] = alpha;
        }
        HouseholderQr { qr: a, tau, diag }
    }

    /// True when some `|r_jj|` is negligible relative to the largest one.
    pub(crate) fn is_rank_deficient(&self) -> bool {
        let biggest = self.diag.iter().fold(0.0_f64, |acc, d| acc.max(libm::fabs(*d)));
        if biggest == 0.0 {
            return true;
        }
        let scale = self.qr.rows().max(self.qr.cols()) as f64;
        let tol = biggest * scale * f64::EPSILON;
        self.diag.iter().any(|d| libm::fabs(*d) <= tol)
    }

    /// Applies `Qᵀ` to `b` in place.
    fn apply_qt(&self, b: &mut Matrix) {
        let (m, n) = (self.qr.rows(), self.qr.cols());
        for j in 0..n {
            if self.tau[j] == 0.0 {
                continue;
            }
            for c in 0..b.cols() {
                let mut s = b[(j, c)];
                for i in j + 1..m {
                    s += self.qr[(i, j)] * b[(i, c)];
                }
                s *= self.tau[j];
                b[(j, c)] -= s;
                for i in j + 1..m {
                    b[(i, c)] -= s * self.qr[(i, j)];
                }
            }
        }
    }

    /// Least-squares solution of `A X ≈ B`. The caller checks rank first.
    pub(crate) fn solve(&self, b: &Matrix) -> Matrix {
        let n = self.qr.cols();
        let mut qtb = b.clone();
        self.apply_qt(&mut qtb);
        let mut x = Matrix::zeros(n, b.cols());
        for c in 0..b.cols() {
            for i in (0..n).rev() {
                let mut s = qtb[(i, c)];
                for p in i + 1..n {
                    s -= self.qr[(i, p)] * x[(p, c)];
                }
                x[(i, c)] = s / self.qr[(i, i)];
            }
        }
        x
    }

    /// `(AᵀA)⁻¹ = R⁻¹ R⁻ᵀ`, exactly symmetric.
    pub(crate) fn inverse_gram(&self) -> Matrix {
        let n = self.qr.cols();
        // Upper-triangular inverse of R, column by column.
        let mut rinv = Matrix::zeros(n, n);
        for c in 0..n {
            rinv[(c, c)] = 1.0 / self.qr[(c, c)];
            for i in (0..c).rev() {
                let mut s = 0.0;
                for p in i + 1..=c {
                    s += self.qr[(i, p)] * rinv[(p, c)];
                }
                rinv[(i, c)] = -s / self.qr[(i, i)];
            }
        }
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let start = j;
                let mut s = 0.0;
                for p in start..n {
                    s += rinv[(i, p)] * rinv[(j, p)];
                }
                g[(i, j)] = s;
                g[(j, i)] = s;
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_and_transpose_agree() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        let b = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        let ab = a.matmul(&b).unwrap();
        assert_eq!(ab, Matrix::from_rows(&[[4.0, 5.0], [10.0, 11.0]]));
        assert_eq!(a.transpose().t_matmul(&b).unwrap(), ab);
        assert_eq!(a.matmul_t(&b.transpose()).unwrap(), ab);
    }

    #[test]
    fn matmul_rejects_bad_shapes() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(a.matmul(&a), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let a = Matrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]]);
        let ch = Cholesky::factor(&a).unwrap();
        let x = ch.solve(&Matrix::column(&[2.0, 1.0])).unwrap();
        let back = a.matmul(&x).unwrap();
        assert!(back.max_abs_diff(&Matrix::column(&[2.0, 1.0])) < 1e-14);
        assert!(ch.pivots().iter().all(|p| *p > 0.0));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]);
        assert_eq!(Cholesky::factor(&a).unwrap_err(), Error::NumericalBreakdown);
    }

    #[test]
    fn qr_least_squares_on_overdetermined_line() {
        // y = 1 + 2x through three exact points.
        let a = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]);
        let y = Matrix::column(&[1.0, 3.0, 5.0]);
        let qr = HouseholderQr::factor(a.clone());
        assert!(!qr.is_rank_deficient());
        let x = qr.solve(&y);
        assert!((x[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((x[(1, 0)] - 2.0).abs() < 1e-12);
        let g = a.t_matmul(&a).unwrap();
        let gi = qr.inverse_gram();
        assert!(g.matmul(&gi).unwrap().max_abs_diff(&Matrix::identity(2)) < 1e-12);
    }

    #[test]
    fn qr_flags_duplicate_columns() {
        let a = Matrix::from_rows(&[[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]);
        assert!(HouseholderQr::factor(a).is_rank_deficient());
    }
}
