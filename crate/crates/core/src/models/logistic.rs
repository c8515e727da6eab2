use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::models::TargetModel;

/// `log(1 + e^z)` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Bayesian logistic regression with a standard normal prior on every coefficient.
///
/// The design matrix carries the intercept as its first column.
#[derive(Debug, Clone)]
pub struct LogisticRegressionModel {
    design: DMatrix<f64>,
    labels: DVector<f64>,
}

impl LogisticRegressionModel {
    /// Builds the model from a ready design matrix (intercept column included) and 0/1 labels.
    pub fn new(design: DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        check_dim(design.nrows(), labels.len())?;
        if labels.iter().any(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        if design.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("design matrix has non-finite entries".into()));
        }
        Ok(Self { design, labels })
    }

    /// Standardizes every feature column to zero mean and unit variance (divisor `n − 1`)
    /// and prepends a column of ones.
    pub fn standardized(features: &DMatrix<f64>, labels: DVector<f64>) -> Result<Self> {
        let (rows, cols) = features.shape();
        if rows < 2 {
            return Err(Error::InvalidArgument("need at least two rows to standardize".into()));
        }
        let mut design = DMatrix::from_element(rows, cols + 1, 1.0);
        for j in 0..cols {
            let col = features.column(j);
            let mean = col.mean();
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (rows as f64 - 1.0);
            if !(var > 0.0) {
                return Err(Error::InvalidArgument(format!("feature column {j} is constant")));
            }
            let sd = var.sqrt();
            for i in 0..rows {
                design[(i, j + 1)] = (features[(i, j)] - mean) / sd;
            }
        }
        Self::new(design, labels)
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }
}

impl TargetModel for LogisticRegressionModel {
    fn dim(&self) -> usize {
        self.design.ncols()
    }

    fn name(&self) -> &str {
        "logistic_regression"
    }

    fn potential(&self, beta: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), beta.len())?;
        let z = &self.design * beta;
        let likelihood: f64 = z
            .iter()
            .zip(self.labels.iter())
            .map(|(&z, &y)| softplus(z) - y * z)
            .sum();
        Ok(0.5 * beta.norm_squared() + likelihood)
    }

    fn gradient(&self, beta: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), beta.len())?;
        let mut residual = &self.design * beta;
        for (r, &y) in residual.iter_mut().zip(self.labels.iter()) {
            *r = sigmoid(*r) - y;
        }
        Ok(beta + self.design.tr_mul(&residual))
    }
}
