use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::models::{softplus, TargetModel};

const SCHOOLS: usize = 8;
const MU_LOW: f64 = -15.0;
const MU_WIDTH: f64 = 30.0;
const TAU_WIDTH: f64 = 15.0;

/// Hierarchical normal model with `mu ~ U[-15, 15]`, `tau ~ U[0, 15]`,
/// `theta_i ~ N(mu, tau²)` and `y_i ~ N(theta_i, sigma_i²)`.
///
/// Sampling coordinates are `(theta_1..theta_8, u_mu, u_tau)`; the two hyperparameters are
/// mapped into their intervals through a scaled logistic sigmoid.
#[derive(Debug, Clone)]
pub struct EightSchoolsModel {
    y: [f64; SCHOOLS],
    sigma: [f64; SCHOOLS],
}

/// Constrained view of one point in sampling space.
#[derive(Debug, Clone, PartialEq)]
pub struct EightSchoolsParams {
    pub theta: [f64; SCHOOLS],
    pub mu: f64,
    pub tau: f64,
    pub log_jacobian: f64,
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl EightSchoolsModel {
    pub fn new(y: [f64; SCHOOLS], sigma: [f64; SCHOOLS]) -> Result<Self> {
        if let Some(bad) = sigma.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "observation standard deviations must be positive, got {bad}"
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("observed effects must be finite".into()));
        }
        Ok(Self { y, sigma })
    }

    /// Parses the two-line data format: eight comma-separated effects, then eight
    /// comma-separated standard deviations. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        if rows.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "expected 2 data lines (y, sigma), found {}",
                rows.len()
            )));
        }
        let parse_row = |line: &str, what: &str| -> Result<[f64; SCHOOLS]> {
            let values = line
                .split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|e| {
                        Error::InvalidArgument(format!("bad {what} value {:?}: {e}", f.trim()))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            values.try_into().map_err(|v: Vec<f64>| {
                Error::InvalidArgument(format!("expected {SCHOOLS} {what} values, found {}", v.len()))
            })
        };
        Self::new(parse_row(rows[0], "y")?, parse_row(rows[1], "sigma")?)
    }

    /// The same model with the likelihood removed (infinitely noisy observations), useful
    /// for checking the prior pushforward.
    pub fn prior_only() -> Self {
        Self {
            y: [0.0; SCHOOLS],
            sigma: [f64::INFINITY; SCHOOLS],
        }
    }

    pub fn y(&self) -> &[f64; SCHOOLS] {
        &self.y
    }

    pub fn sigma(&self) -> &[f64; SCHOOLS] {
        &self.sigma
    }

    /// Maps unconstrained coordinates to `(theta, mu, tau)` plus the log-Jacobian of the map.
    pub fn transform(u: &DVector<f64>) -> Result<EightSchoolsParams> {
        check_dim(SCHOOLS + 2, u.len())?;
        let (um, ut) = (u[SCHOOLS], u[SCHOOLS + 1]);
        let mut theta = [0.0; SCHOOLS];
        theta.copy_from_slice(&u.as_slice()[..SCHOOLS]);
        // log s(u) = -softplus(-u), log(1 - s(u)) = -softplus(u)
        let log_jacobian = MU_WIDTH.ln() - softplus(-um) - softplus(um) + TAU_WIDTH.ln()
            - softplus(-ut)
            - softplus(ut);
        Ok(EightSchoolsParams {
            theta,
            mu: MU_LOW + MU_WIDTH * sigmoid(um),
            tau: TAU_WIDTH * sigmoid(ut),
            log_jacobian,
        })
    }

    /// `(theta_1..theta_8, mu, tau)` for reporting.
    pub fn constrained(u: &DVector<f64>) -> Result<Vec<f64>> {
        let p = Self::transform(u)?;
        let mut out = p.theta.to_vec();
        out.push(p.mu);
        out.push(p.tau);
        Ok(out)
    }

    pub fn parameter_names() -> Vec<String> {
        (1..=SCHOOLS)
            .map(|i| format!("theta_{i}"))
            .chain(["mu".to_string(), "tau".to_string()])
            .collect()
    }
}

impl TargetModel for EightSchoolsModel {
    fn dim(&self) -> usize {
        SCHOOLS + 2
    }

    fn name(&self) -> &str {
        "eight_schools"
    }

    fn potential(&self, u: &DVector<f64>) -> Result<f64> {
        let p = Self::transform(u)?;
        let log_tau = TAU_WIDTH.ln() - softplus(-u[SCHOOLS + 1]);
        let inv_tau2 = (-2.0 * log_tau).exp();
        let mut value = 0.0;
        for i in 0..SCHOOLS {
            let r = self.y[i] - p.theta[i];
            value += 0.5 * r * r / (self.sigma[i] * self.sigma[i]);
            let d = p.theta[i] - p.mu;
            value += 0.5 * d * d * inv_tau2 + log_tau;
        }
        Ok(value - p.log_jacobian)
    }

    fn gradient(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let p = Self::transform(u)?;
        let (um, ut) = (u[SCHOOLS], u[SCHOOLS + 1]);
        let log_tau = TAU_WIDTH.ln() - softplus(-ut);
        let inv_tau2 = (-2.0 * log_tau).exp();
        let mut grad = DVector::zeros(SCHOOLS + 2);
        let mut d_mu = 0.0;
        let mut sum_sq = 0.0;
        for i in 0..SCHOOLS {
            let d = p.theta[i] - p.mu;
            grad[i] = (p.theta[i] - self.y[i]) / (self.sigma[i] * self.sigma[i]) + d * inv_tau2;
            d_mu -= d * inv_tau2;
            sum_sq += d * d;
        }
        let (sm, st) = (sigmoid(um), sigmoid(ut));
        // dU/dtau = -sum d² / tau³ + 8 / tau, and dtau/du = tau (1 - s(u)).
        let d_log_tau = -sum_sq * inv_tau2 + SCHOOLS as f64;
        grad[SCHOOLS] = d_mu * MU_WIDTH * sm * (1.0 - sm) - (1.0 - 2.0 * sm);
        grad[SCHOOLS + 1] = d_log_tau * (1.0 - st) - (1.0 - 2.0 * st);
        Ok(grad)
    }
}
