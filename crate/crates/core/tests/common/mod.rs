#![allow(dead_code)]

use alternating_core::Matrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_na(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Moore-Penrose pseudoinverse solution via SVD.
pub fn pinv_solve(h: &Matrix, y: &Matrix) -> Matrix {
    let svd = to_na(h).svd(true, true);
    from_na(&svd.solve(&to_na(y), 1e-14).unwrap())
}

/// Ridge solution through the SVD with Tikhonov filter factors
/// `σ / (σ² + λ)`; equals the pseudoinverse solution at `λ = 0`.
pub fn svd_ridge_solve(h: &Matrix, y: &Matrix, lambda: f64) -> Matrix {
    let svd = to_na(h).svd(true, true);
    let (u, vt, s) = (svd.u.unwrap(), svd.v_t.unwrap(), svd.singular_values);
    let filtered = DMatrix::from_fn(s.len(), s.len(), |i, j| if i == j { s[i] / (s[i] * s[i] + lambda) } else { 0.0 });
    from_na(&(vt.transpose() * filtered * u.transpose() * to_na(y)))
}

pub fn smallest_singular_value(h: &Matrix) -> f64 {
    to_na(h).singular_values().min()
}

/// `(HᵀH + λI)⁻¹HᵀY` by explicit inversion.
pub fn normal_equations(h: &Matrix, y: &Matrix, lambda: f64) -> Matrix {
    let hn = to_na(h);
    let k = hn.ncols();
    let g = hn.transpose() * &hn + DMatrix::identity(k, k) * lambda;
    from_na(&(g.try_inverse().unwrap() * hn.transpose() * to_na(y)))
}

pub fn direct_inverse_gram(h: &Matrix, lambda: f64) -> Matrix {
    let hn = to_na(h);
    let k = hn.ncols();
    from_na(&(hn.transpose() * &hn + DMatrix::identity(k, k) * lambda).try_inverse().unwrap())
}

pub fn is_spd(m: &Matrix) -> bool {
    to_na(m).cholesky().is_some()
}
