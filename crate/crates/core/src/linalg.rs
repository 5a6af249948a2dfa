//! Dense complex least squares.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct LeastSquares {
    pub solution: DVector<Complex64>,
    /// Ratio of the extreme singular values.
    pub condition: f64,
    /// `||A x - b|| / ||b||` (absolute when `b` is zero).
    pub relative_residual: f64,
}

/// Minimum-norm least-squares solution by SVD; singular values below
/// `rcond * sigma_max` are discarded.
pub fn lstsq(a: &DMatrix<Complex64>, b: &DVector<Complex64>, rcond: f64) -> LeastSquares {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    let solution = svd
        .solve(b, rcond * smax)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()));
    let r = a * &solution - b;
    let bn = b.norm();
    LeastSquares {
        condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        relative_residual: if bn > 0.0 { r.norm() / bn } else { r.norm() },
        solution,
    }
}
