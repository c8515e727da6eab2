//! Exact Hamiltonian flow for Gaussian targets and the entropy/jump-distance objectives
//! used to pick the mass matrix and the integration time.
//!
//! For a target `N(mu, Sigma)` and a mass matrix `M` commuting with `Sigma`, the flow
//! decouples along the eigenvectors of `A = M⁻¹ Sigma⁻¹`, each mode oscillating with
//! angular frequency `sqrt(lambda_i)`. Given the start `x0` and `p0 ~ N(0, M)`, the
//! endpoint `x_T` is Gaussian; its covariance is what the conditional entropy criterion
//! maximizes (through its log-determinant).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{check_dim, Error, Result};
use crate::hamiltonian::{MassMatrix, PhasePoint};
use crate::linalg;
use crate::models::GaussianTarget;

/// Relative Frobenius tolerance on `‖M Sigma − Sigma M‖` for the commuting class.
pub const COMMUTATION_TOLERANCE: f64 = 1e-8;

/// `(sin(pi·h), cos(pi·h))`, exact whenever `h` is a multiple of one half. Flow times are
/// routinely quoted as fractions of pi, and an exact half-period has to map `x0` to `−x0`
/// bit for bit.
fn sin_cos_half_turns(h: f64) -> (f64, f64) {
    let r = h - 2.0 * (h / 2.0).round();
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 0.5 {
        (1.0, 0.0)
    } else if r == -0.5 {
        (-1.0, 0.0)
    } else if r.abs() == 1.0 {
        (0.0, -1.0)
    } else {
        (PI * r).sin_cos()
    }
}

/// Phase `omega · t` of a mode, returned as `(sin, cos)`.
fn sin_cos_phase(omega: f64, t: f64) -> (f64, f64) {
    sin_cos_half_turns(omega * (t / PI))
}

/// Eigen-decomposition of `A = M⁻¹ Sigma⁻¹` for a commuting pair.
#[derive(Debug, Clone)]
pub struct SpectralSystem {
    pub a: DMatrix<f64>,
    /// Orthonormal eigenvectors, one per column.
    pub vectors: DMatrix<f64>,
    pub values: DVector<f64>,
    /// `Lambda^{-1/2} Vᵀ M⁻¹ V Lambda^{-1/2}`, the covariance of the sine coefficients.
    gamma: DMatrix<f64>,
    log_det_target: f64,
}

impl SpectralSystem {
    pub fn new(target: &GaussianTarget, mass: &MassMatrix) -> Result<Self> {
        check_dim(target.covariance().nrows(), mass.dim())?;
        let m = mass.matrix();
        let residual = linalg::commutation_residual(&m, target.covariance());
        if residual > COMMUTATION_TOLERANCE {
            return Err(Error::NotCommuting { residual });
        }
        let m_inv = mass.inverse();
        // Commuting symmetric matrices have a symmetric product, so A is SPD and the
        // symmetric eigensolver applies.
        let a = linalg::symmetrize(&(&m_inv * target.precision()));
        let eigen = SymmetricEigen::try_new(a.clone(), 1e-14, 10_000)
            .ok_or_else(|| Error::Numerical("eigendecomposition of M⁻¹Σ⁻¹ did not converge".into()))?;
        if let Some(bad) = eigen.eigenvalues.iter().find(|l| !(**l > 0.0)) {
            return Err(Error::Numerical(format!("non-positive eigenvalue {bad} of M⁻¹Σ⁻¹")));
        }
        let vectors = eigen.eigenvectors;
        let values = eigen.eigenvalues;
        let inv_root = values.map(|l| 1.0 / l.sqrt());
        let mut gamma = vectors.transpose() * &m_inv * &vectors;
        for i in 0..gamma.nrows() {
            for j in 0..gamma.ncols() {
                gamma[(i, j)] *= inv_root[i] * inv_root[j];
            }
        }
        let log_det_target = 2.0 * target.covariance_factor().diagonal().map(f64::ln).sum();
        Ok(Self {
            a,
            vectors,
            values,
            gamma,
            log_det_target,
        })
    }

    pub fn frequencies(&self) -> DVector<f64> {
        self.values.map(f64::sqrt)
    }

    /// `‖A V − V diag(Lambda)‖_F`.
    pub fn residual(&self) -> f64 {
        (&self.a * &self.vectors - &self.vectors * DMatrix::from_diagonal(&self.values)).norm()
    }
}

/// Evolves `q` for time `t` under the exact flow of `H = ½(x−mu)ᵀSigma⁻¹(x−mu) + ½pᵀM⁻¹p`.
pub fn analytic_flow(
    target: &GaussianTarget,
    mass: &MassMatrix,
    q: &PhasePoint,
    t: f64,
) -> Result<PhasePoint> {
    let system = SpectralSystem::new(target, mass)?;
    flow_with(&system, target, mass, q, t)
}

pub(crate) fn flow_with(
    system: &SpectralSystem,
    target: &GaussianTarget,
    mass: &MassMatrix,
    q: &PhasePoint,
    t: f64,
) -> Result<PhasePoint> {
    check_dim(system.values.len(), q.dim())?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("flow time must be >= 0, got {t}")));
    }
    let v = &system.vectors;
    let omega = system.frequencies();
    // x0 - mu = V a,  p0 = M V sqrt(Lambda) b
    let a = v.tr_mul(&(&q.x - target.mean()));
    let b = v.tr_mul(&mass.velocity(&q.p)).component_div(&omega);
    let mut x_modes = DVector::zeros(a.len());
    let mut v_modes = DVector::zeros(a.len());
    for i in 0..a.len() {
        let (s, c) = sin_cos_phase(omega[i], t);
        x_modes[i] = a[i] * c + b[i] * s;
        v_modes[i] = omega[i] * (-a[i] * s + b[i] * c);
    }
    let x = target.mean() + v * x_modes;
    let velocity = v * v_modes;
    let p = mass.matrix() * velocity;
    Ok(PhasePoint { x, p })
}

/// Covariance of `x_T` given `x0` when `p0 ~ N(0, M)`: `V S Gamma S Vᵀ` with
/// `S = diag(sin(sqrt(lambda_i) T))`.
pub fn conditional_covariance(
    target: &GaussianTarget,
    mass: &MassMatrix,
    time: f64,
) -> Result<DMatrix<f64>> {
    let system = SpectralSystem::new(target, mass)?;
    let sines = system.frequencies().map(|w| sin_cos_phase(w, time).0);
    let mut inner = system.gamma.clone();
    for i in 0..inner.nrows() {
        for j in 0..inner.ncols() {
            inner[(i, j)] *= sines[i] * sines[j];
        }
    }
    Ok(linalg::symmetrize(&(&system.vectors * inner * system.vectors.transpose())))
}

/// Log-determinant of the conditional covariance, which collapses when any mode
/// returns exactly to its start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogDet {
    Finite(f64),
    Degenerate,
}

impl LogDet {
    pub fn value(self) -> f64 {
        match self {
            LogDet::Finite(v) => v,
            LogDet::Degenerate => f64::NEG_INFINITY,
        }
    }

    pub fn is_degenerate(self) -> bool {
        matches!(self, LogDet::Degenerate)
    }
}

/// `sum_i [log lambda_Sigma,i + log((1 − cos 2 sqrt(lambda_i) T) / 2)]`.
pub fn log_det_conditional_cov(target: &GaussianTarget, mass: &MassMatrix, time: f64) -> Result<LogDet> {
    let system = SpectralSystem::new(target, mass)?;
    Ok(log_det_with(&system, time))
}

pub(crate) fn log_det_with(system: &SpectralSystem, time: f64) -> LogDet {
    let mut total = system.log_det_target;
    for w in system.frequencies().iter() {
        let factor = (1.0 - sin_cos_phase(2.0 * w, time).1) / 2.0;
        if !(factor > 0.0) {
            return LogDet::Degenerate;
        }
        total += factor.ln();
    }
    LogDet::Finite(total)
}

/// Maximizes the log-determinant over the grid `T_j = j · t_max / grid`, `j = 1..=grid`.
/// Returns `(T*, value)`; ties keep the smallest time.
pub fn argmax_time_on_grid(
    target: &GaussianTarget,
    mass: &MassMatrix,
    t_max: f64,
    grid: usize,
) -> Result<(f64, LogDet)> {
    if grid == 0 || !(t_max > 0.0) {
        return Err(Error::InvalidArgument("grid needs at least one point and t_max > 0".into()));
    }
    let system = SpectralSystem::new(target, mass)?;
    let mut best = (f64::NAN, LogDet::Degenerate);
    for j in 1..=grid {
        let t = t_max * j as f64 / grid as f64;
        let value = log_det_with(&system, t);
        if best.0.is_nan() || value.value() > best.1.value() {
            best = (t, value);
        }
    }
    Ok(best)
}

/// Random zero-mean target and mass matrix sharing a random orthonormal eigenbasis, with
/// eigenvalues drawn uniformly from `[0.2, 5]`.
pub fn random_commuting_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(GaussianTarget, MassMatrix)> {
    let gauss = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let q = gauss.qr().q();
    let spread = Uniform::new(0.2, 5.0).expect("valid range");
    let sigma_eig = DVector::<f64>::from_fn(n, |_, _| spread.sample(rng));
    let mass_eig = DVector::<f64>::from_fn(n, |_, _| spread.sample(rng));
    let sigma = linalg::symmetrize(&(&q * DMatrix::from_diagonal(&sigma_eig) * q.transpose()));
    let mass = linalg::symmetrize(&(&q * DMatrix::from_diagonal(&mass_eig) * q.transpose()));
    Ok((GaussianTarget::new(DVector::zeros(n), sigma)?, MassMatrix::new(mass)?))
}

fn check_positive(k: f64, m: f64) -> Result<()> {
    if k > 0.0 && m > 0.0 && k.is_finite() && m.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "target variance and mass must be positive, got k={k}, m={m}"
        )))
    }
}

/// Smallest integration time maximizing the conditional entropy for `N(0, k)` with mass `m`.
pub fn optimal_time_ce(k: f64, m: f64) -> Result<f64> {
    check_positive(k, m)?;
    Ok(0.5 * PI * (k * m).sqrt())
}

/// Smallest integration time maximizing the expected squared jump for `N(0, k)` with mass `m`.
pub fn optimal_time_esjd(k: f64, m: f64) -> Result<f64> {
    check_positive(k, m)?;
    Ok(PI * (k * m).sqrt())
}

/// Law of `x_T` given `x0` in one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalLaw1D {
    pub mean: f64,
    pub variance: f64,
}

/// `x_T | x0 ~ N(x0 cos(T / sqrt(km)), k sin²(T / sqrt(km)))`.
pub fn conditional_law_1d(k: f64, m: f64, time: f64, x0: f64) -> Result<ConditionalLaw1D> {
    check_positive(k, m)?;
    let (s, c) = sin_cos_phase(1.0 / (k * m).sqrt(), time);
    Ok(ConditionalLaw1D {
        mean: x0 * c,
        variance: k * s * s,
    })
}

/// `E|x_T − x0|² = 2k (1 − cos(T / sqrt(km)))` with `x0` drawn from the target.
pub fn esjd_1d(k: f64, m: f64, time: f64) -> Result<f64> {
    check_positive(k, m)?;
    Ok(2.0 * k * (1.0 - sin_cos_phase(1.0 / (k * m).sqrt(), time).1))
}
