use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::models::TargetModel;

const CURVATURE: f64 = 100.0;

/// Banana-shaped density `exp(-x1² - 100 (x2 - b x1²)²)`; exactly Gaussian at `b = 0`.
#[derive(Debug, Clone)]
pub struct RosenbrockTarget {
    b: f64,
}

impl RosenbrockTarget {
    pub fn new(b: f64) -> Result<Self> {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("Rosenbrock b must be >= 0, got {b}")));
        }
        Ok(Self { b })
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

impl TargetModel for RosenbrockTarget {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "rosenbrock"
    }

    fn potential(&self, x: &DVector<f64>) -> Result<f64> {
        check_dim(2, x.len())?;
        let r = x[1] - self.b * x[0] * x[0];
        Ok(x[0] * x[0] + CURVATURE * r * r)
    }

    fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(2, x.len())?;
        let r = x[1] - self.b * x[0] * x[0];
        Ok(DVector::from_vec(vec![
            2.0 * x[0] - 4.0 * CURVATURE * self.b * x[0] * r,
            2.0 * CURVATURE * r,
        ]))
    }
}
