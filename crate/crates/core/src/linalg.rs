use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

const EIG_EPS: f64 = f64::EPSILON;
const EIG_MAX_ITER: usize = 0; // 0 = unbounded in nalgebra

/// Ascending eigenvalues of a Hermitian matrix.
pub(crate) fn hermitian_eigenvalues(m: DMatrix<Complex64>) -> Result<Vec<f64>> {
    let dim = m.nrows();
    if dim == 0 {
        return Ok(Vec::new());
    }
    let eig = SymmetricEigen::try_new(m, EIG_EPS, EIG_MAX_ITER)
        .ok_or(Error::EigenNonConvergence { dim })?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Full eigendecomposition, eigenpairs sorted by ascending eigenvalue.
pub(crate) fn hermitian_eigen(
    m: DMatrix<Complex64>,
) -> Result<(Vec<f64>, Vec<DVector<Complex64>>)> {
    let dim = m.nrows();
    let eig = SymmetricEigen::try_new(m, EIG_EPS, EIG_MAX_ITER)
        .ok_or(Error::EigenNonConvergence { dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    Ok((values, vectors))
}

/// Largest entry modulus.
#[cfg(test)]
pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
