//! Target distributions `pi(x) = exp(-U(x))` and the benchmark models.
//!
//! Every model works in an unconstrained space and hand-codes its gradient.
//! Models are immutable once built and can be shared between chains.

mod eight_schools;
mod gaussian;
mod lgcp;
mod logistic;
mod rosenbrock;

use nalgebra::DVector;

use crate::error::Result;

pub use eight_schools::{EightSchoolsModel, EightSchoolsParams};
pub use gaussian::GaussianTarget;
pub use lgcp::{LgcpModel, LgcpParams};
pub use logistic::{softplus, LogisticRegressionModel};
pub use rosenbrock::RosenbrockTarget;

/// A differentiable unnormalized log-density, expressed through its potential `U = -log pi`.
pub trait TargetModel: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> &str;

    /// `U(x)` up to an additive constant.
    fn potential(&self, x: &DVector<f64>) -> Result<f64>;

    /// `∇U(x)`.
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>>;
}

impl<T: TargetModel + ?Sized> TargetModel for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn potential(&self, x: &DVector<f64>) -> Result<f64> {
        (**self).potential(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).gradient(x)
    }
}

/// Central-difference gradient of the potential with step `1e-6 · (1 + |x_i|)`.
pub fn central_difference_gradient<M: TargetModel + ?Sized>(
    model: &M,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    let mut grad = DVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let h = 1e-6 * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let up = model.potential(&probe)?;
        probe[i] = x[i] - h;
        let down = model.potential(&probe)?;
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    Ok(grad)
}

/// Worst componentwise discrepancy between the analytic gradient and central differences,
/// relative to `max(|fd_i|, 1)`.
pub fn gradient_check<M: TargetModel + ?Sized>(model: &M, x: &DVector<f64>) -> Result<f64> {
    let analytic = model.gradient(x)?;
    let numeric = central_difference_gradient(model, x)?;
    Ok(analytic
        .iter()
        .zip(numeric.iter())
        .map(|(a, n)| (a - n).abs() / n.abs().max(1.0))
        .fold(0.0, f64::max))
}
