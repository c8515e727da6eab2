use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Result};
use crate::linalg;

/// Streaming sample mean and unbiased covariance (Welford's recursion).
#[derive(Debug, Clone)]
pub struct RunningCovariance {
    count: usize,
    mean: DVector<f64>,
    /// Sum of outer products of deviations from the running mean.
    scatter: DMatrix<f64>,
}

impl RunningCovariance {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: DVector::zeros(dim),
            scatter: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Folds one sample.
    pub fn push(&mut self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        self.count += 1;
        let x = DVector::from_column_slice(x);
        let delta = &x - &self.mean;
        let n = self.count as f64;
        self.mean.axpy(1.0 / n, &delta, 1.0);
        // (x - mean_old)(x - mean_new)ᵀ = (n-1)/n · delta deltaᵀ
        self.scatter.ger((n - 1.0) / n, &delta, &delta, 1.0);
        Ok(())
    }

    /// Folds every sample of a batch, in order.
    pub fn update<'a, I>(&mut self, batch: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        for row in batch {
            self.push(row)?;
        }
        Ok(())
    }

    /// Unbiased covariance; the zero matrix until two samples have been seen.
    pub fn covariance(&self) -> DMatrix<f64> {
        if self.count < 2 {
            return DMatrix::zeros(self.dim(), self.dim());
        }
        linalg::symmetrize(&self.scatter) / (self.count as f64 - 1.0)
    }

    /// Diagonal loading `1e-6 · (trace(C)/n + 1)`.
    pub fn regularization(&self) -> f64 {
        let n = self.dim().max(1) as f64;
        1e-6 * (self.covariance().trace() / n + 1.0)
    }

    /// `C + eps_reg · I`, safe to factorize.
    pub fn regularized(&self) -> DMatrix<f64> {
        self.loaded(1.0)
    }

    /// `C + factor · eps_reg · I`.
    pub fn loaded(&self, factor: f64) -> DMatrix<f64> {
        let mut c = self.covariance();
        let eps = factor * self.regularization();
        for i in 0..self.dim() {
            c[(i, i)] += eps;
        }
        c
    }
}

/// Folds a batch into a running estimate and returns the updated estimate.
pub fn update_covariance<'a, I>(mut rc: RunningCovariance, batch: I) -> Result<RunningCovariance>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    rc.update(batch)?;
    Ok(rc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sample_covariance;
    use rand::{Rng, SeedableRng};

    #[test]
    fn two_point_example() {
        let rc = update_covariance(RunningCovariance::new(2), [&[0.0, 0.0][..], &[2.0, 0.0][..]]).unwrap();
        assert_eq!(rc.mean().as_slice(), &[1.0, 0.0]);
        assert_eq!(rc.covariance(), DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn single_sample_has_zero_covariance() {
        let mut rc = RunningCovariance::new(3);
        rc.push(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(rc.covariance(), DMatrix::zeros(3, 3));
        let reg = rc.regularized();
        assert!(reg.diagonal().iter().all(|&d| d == 1e-6));
    }

    #[test]
    fn incremental_matches_batch_recompute() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let data = DMatrix::from_fn(1000, 4, |_, j| rng.random::<f64>() * (j as f64 + 1.0) + j as f64);
        let mut rc = RunningCovariance::new(4);
        for (t, row) in data.row_iter().enumerate() {
            let row: Vec<f64> = row.iter().copied().collect();
            rc.push(&row).unwrap();
            if t == 1 || t == 99 || t == 999 {
                let prefix = data.rows(0, t + 1).into_owned();
                let expected_cov = sample_covariance(&prefix);
                let expected_mean = prefix.row_mean().transpose();
                assert!((rc.covariance() - expected_cov).amax() < 1e-8);
                assert!((rc.mean() - expected_mean).amax() < 1e-8);
            }
        }
        let cov = rc.covariance();
        assert_eq!(cov, cov.transpose());
    }
}
