use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Factor};
use crate::models::TargetModel;

/// Multivariate normal `N(mean, covariance)` with a cached precision matrix.
#[derive(Debug, Clone)]
pub struct GaussianTarget {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    precision: DMatrix<f64>,
    factor: Factor,
}

impl GaussianTarget {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        check_dim(mean.len(), covariance.nrows())?;
        let covariance = linalg::symmetrize(&covariance);
        let factor = linalg::cholesky(&covariance, "target covariance")?;
        let precision = linalg::symmetrize(&factor.inverse());
        Ok(Self {
            mean,
            covariance,
            precision,
            factor,
        })
    }

    /// `N(0, I_n)`.
    pub fn standard(n: usize) -> Self {
        Self::new(DVector::zeros(n), DMatrix::identity(n, n)).expect("identity is SPD")
    }

    /// Zero-mean Gaussian with independent coordinates of the given variances.
    pub fn diagonal(variances: &[f64]) -> Result<Self> {
        if variances.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::NotPositiveDefinite("variances must be positive".into()));
        }
        let n = variances.len();
        Self::new(
            DVector::zeros(n),
            DMatrix::from_diagonal(&DVector::from_column_slice(variances)),
        )
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    /// Lower Cholesky factor of the covariance.
    pub fn covariance_factor(&self) -> DMatrix<f64> {
        self.factor.l()
    }
}

impl TargetModel for GaussianTarget {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn name(&self) -> &str {
        "gaussian"
    }

    fn potential(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let centered = x - &self.mean;
        Ok(0.5 * centered.dot(&(&self.precision * &centered)))
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(&self.precision * (x - &self.mean))
    }
}
