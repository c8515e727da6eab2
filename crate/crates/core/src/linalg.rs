//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

pub type Factor = Cholesky<f64, Dyn>;

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Cholesky factorization of a symmetric matrix, with a labelled error on failure.
pub fn cholesky(a: &DMatrix<f64>, what: &str) -> Result<Factor> {
    if !a.is_square() {
        return Err(Error::NotPositiveDefinite(format!(
            "{what} is {}x{}, not square",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite(format!("{what} has non-finite entries")));
    }
    Cholesky::new(symmetrize(a))
        .ok_or_else(|| Error::NotPositiveDefinite(format!("Cholesky of {what} failed")))
}

/// `‖AB − BA‖_F / ‖AB‖_F`.
pub fn commutation_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let ab = a * b;
    let ba = b * a;
    let scale = ab.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (ab - ba).norm() / scale
}

/// Unbiased sample covariance (divisor `n − 1`) of the rows of `samples`.
pub fn sample_covariance(samples: &DMatrix<f64>) -> DMatrix<f64> {
    let n = samples.nrows();
    let dim = samples.ncols();
    if n < 2 {
        return DMatrix::zeros(dim, dim);
    }
    let mean = samples.row_mean();
    let mut centered = samples.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    (centered.transpose() * &centered) / (n as f64 - 1.0)
}
