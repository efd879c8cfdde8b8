//! Dense helpers shared by the geometry and spectral code.

use nalgebra::{DMatrix, DVector};

use crate::spectral::jacobi_eigen;

/// Orthonormal basis (as columns) of `{x : nᵢᵀx = 0}` in `ℝⁿ`.
pub fn null_space(normals: &[DVector<f64>], n: usize) -> DMatrix<f64> {
    if normals.is_empty() {
        return DMatrix::identity(n, n);
    }
    let mut gram = DMatrix::zeros(n, n);
    for a in normals {
        let u = a / a.norm();
        gram += &u * u.transpose();
    }
    let (vals, vecs) = jacobi_eigen(&gram);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&k| vals[k].abs() <= 1e-10)
        .map(|k| vecs.column(k).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.amax().max(1.0);
    svd.solve(b, eps)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Largest absolute entry, zero for empty input.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}
