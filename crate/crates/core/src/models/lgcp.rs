use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Factor};
use crate::models::TargetModel;

/// Hyperparameters of the log-Gaussian Cox process on a `d × d` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgcpParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub s: f64,
    pub d: usize,
}

impl LgcpParams {
    /// Reference settings: `alpha = 1.91`, `beta = 1/33`, `mu = log 126 − alpha/2`, `s = 1/d²`.
    /// The expected total count over the grid is 126 for every `d`.
    pub fn reference(d: usize) -> Self {
        let alpha = 1.91;
        Self {
            alpha,
            beta: 1.0 / 33.0,
            mu: 126f64.ln() - alpha / 2.0,
            s: 1.0 / (d * d) as f64,
            d,
        }
    }

    pub fn cells(&self) -> usize {
        self.d * self.d
    }

    /// `Sigma[(i,j),(i',j')] = alpha · exp(−delta / (beta·d))`, cells ordered row-major.
    pub fn prior_covariance(&self) -> DMatrix<f64> {
        let d = self.d;
        let scale = self.beta * d as f64;
        DMatrix::from_fn(d * d, d * d, |a, b| {
            let (i, j) = ((a / d) as f64, (a % d) as f64);
            let (k, l) = ((b / d) as f64, (b % d) as f64);
            let delta = ((i - k).powi(2) + (j - l).powi(2)).sqrt();
            self.alpha * (-delta / scale).exp()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidArgument(format!("grid side must be >= 2, got {}", self.d)));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.s > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid LGCP parameters {self:?}")));
        }
        Ok(())
    }
}

/// Posterior of the latent log-intensity field given Poisson counts.
#[derive(Debug, Clone)]
pub struct LgcpModel {
    params: LgcpParams,
    counts: DVector<f64>,
    factor: Factor,
    precision: DMatrix<f64>,
}

impl LgcpModel {
    /// `counts` is row-major over the grid and must hold non-negative integers.
    pub fn new(params: LgcpParams, counts: DVector<f64>) -> Result<Self> {
        params.validate()?;
        check_dim(params.cells(), counts.len())?;
        if counts.iter().any(|&c| !(c >= 0.0) || c.fract() != 0.0) {
            return Err(Error::InvalidArgument("counts must be non-negative integers".into()));
        }
        let factor = linalg::cholesky(&params.prior_covariance(), "LGCP prior covariance")?;
        let precision = linalg::symmetrize(&factor.inverse());
        Ok(Self {
            params,
            counts,
            factor,
            precision,
        })
    }

    pub fn params(&self) -> &LgcpParams {
        &self.params
    }

    pub fn counts(&self) -> &DVector<f64> {
        &self.counts
    }

    /// Lower Cholesky factor of the prior covariance.
    pub fn prior_factor(&self) -> DMatrix<f64> {
        self.factor.l()
    }

    /// The constant prior mean `mu · 1`.
    pub fn prior_mean(&self) -> DVector<f64> {
        DVector::from_element(self.params.cells(), self.params.mu)
    }
}

impl TargetModel for LgcpModel {
    fn dim(&self) -> usize {
        self.params.cells()
    }

    fn name(&self) -> &str {
        "lgcp"
    }

    fn potential(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let centered = x.add_scalar(-self.params.mu);
        let prior = 0.5 * centered.dot(&(&self.precision * &centered));
        let likelihood: f64 = x
            .iter()
            .zip(self.counts.iter())
            .map(|(&xi, &yi)| self.params.s * xi.exp() - yi * xi)
            .sum();
        Ok(prior + likelihood)
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.dim(), x.len())?;
        let centered = x.add_scalar(-self.params.mu);
        let mut grad = &self.precision * centered;
        for ((g, &xi), &yi) in grad.iter_mut().zip(x.iter()).zip(self.counts.iter()) {
            *g += self.params.s * xi.exp() - yi;
        }
        Ok(grad)
    }
}
