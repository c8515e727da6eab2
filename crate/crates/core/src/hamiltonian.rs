//! Phase-space dynamics: energies, the momentum covariance and the leapfrog integrator.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Factor};
use crate::models::TargetModel;

/// Position and momentum of the fictitious Hamiltonian system.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x: DVector<f64>,
    pub p: DVector<f64>,
}

impl PhasePoint {
    pub fn new(x: DVector<f64>, p: DVector<f64>) -> Result<Self> {
        check_dim(x.len(), p.len())?;
        Ok(Self { x, p })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.p.iter()).all(|v| v.is_finite())
    }

    /// The same point with the momentum reversed.
    pub fn flipped(&self) -> Self {
        Self {
            x: self.x.clone(),
            p: -&self.p,
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    /// `M = L Lᵀ`.
    Direct {
        matrix: DMatrix<f64>,
        factor: Factor,
        lower: DMatrix<f64>,
    },
    /// Held through `M⁻¹ = C Cᵀ`, which is what an adapted covariance estimate provides.
    Inverse {
        inverse: DMatrix<f64>,
        factor: Factor,
        lower: DMatrix<f64>,
    },
}

/// Symmetric positive-definite covariance `M` of the momentum, factorized once.
#[derive(Debug, Clone)]
pub struct MassMatrix {
    repr: Repr,
}

impl MassMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let matrix = linalg::symmetrize(&matrix);
        let factor = linalg::cholesky(&matrix, "mass matrix")?;
        let lower = factor.l();
        Ok(Self {
            repr: Repr::Direct { matrix, factor, lower },
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("identity is SPD")
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    /// Builds `M` from its inverse, e.g. `M = Σ̂⁻¹` from a covariance estimate `Σ̂`.
    pub fn from_inverse(inverse: DMatrix<f64>) -> Result<Self> {
        let inverse = linalg::symmetrize(&inverse);
        let factor = linalg::cholesky(&inverse, "inverse mass matrix")?;
        let lower = factor.l();
        Ok(Self {
            repr: Repr::Inverse { inverse, factor, lower },
        })
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Direct { matrix, .. } => matrix.nrows(),
            Repr::Inverse { inverse, .. } => inverse.nrows(),
        }
    }

    /// Dense `M`.
    pub fn matrix(&self) -> DMatrix<f64> {
        match &self.repr {
            Repr::Direct { matrix, .. } => matrix.clone(),
            Repr::Inverse { factor, .. } => factor.inverse(),
        }
    }

    /// Dense `M⁻¹`.
    pub fn inverse(&self) -> DMatrix<f64> {
        match &self.repr {
            Repr::Direct { factor, .. } => factor.inverse(),
            Repr::Inverse { inverse, .. } => inverse.clone(),
        }
    }

    /// `M⁻¹ p`.
    pub fn velocity(&self, p: &DVector<f64>) -> DVector<f64> {
        match &self.repr {
            Repr::Direct { factor, .. } => factor.solve(p),
            Repr::Inverse { inverse, .. } => inverse * p,
        }
    }

    /// `½ pᵀ M⁻¹ p`, evaluated through the triangular factor.
    pub fn kinetic_energy(&self, p: &DVector<f64>) -> f64 {
        match &self.repr {
            Repr::Direct { lower, .. } => {
                let w = lower
                    .solve_lower_triangular(p)
                    .expect("Cholesky factor has a positive diagonal");
                0.5 * w.norm_squared()
            }
            Repr::Inverse { lower, .. } => 0.5 * lower.tr_mul(p).norm_squared(),
        }
    }

    /// Draws `p ~ N(0, M)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        match &self.repr {
            Repr::Direct { lower, .. } => lower * z,
            // M = C⁻ᵀ C⁻¹, so C⁻ᵀ z has covariance M.
            Repr::Inverse { lower, .. } => lower
                .tr_solve_lower_triangular(&z)
                .expect("Cholesky factor has a positive diagonal"),
        }
    }
}

/// Step size and number of leapfrog steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeapfrogConfig {
    pub epsilon: f64,
    pub steps: usize,
}

impl LeapfrogConfig {
    pub fn new(epsilon: f64, steps: usize) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("step size must be positive, got {epsilon}")));
        }
        if steps == 0 {
            return Err(Error::InvalidArgument("need at least one leapfrog step".into()));
        }
        Ok(Self { epsilon, steps })
    }

    /// Splits an integration time `T` into `steps` steps of size `T / steps`.
    pub fn from_time(time: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidArgument("need at least one leapfrog step".into()));
        }
        Self::new(time / steps as f64, steps)
    }

    pub fn time(&self) -> f64 {
        self.epsilon * self.steps as f64
    }
}

/// `K(p) = ½ pᵀ M⁻¹ p`.
pub fn kinetic_energy(p: &DVector<f64>, mass: &MassMatrix) -> Result<f64> {
    check_dim(mass.dim(), p.len())?;
    Ok(mass.kinetic_energy(p))
}

/// `H(x, p) = U(x) + K(p)`.
pub fn total_energy<M: TargetModel + ?Sized>(
    q: &PhasePoint,
    model: &M,
    mass: &MassMatrix,
) -> Result<f64> {
    check_dim(mass.dim(), q.dim())?;
    Ok(model.potential(&q.x)? + mass.kinetic_energy(&q.p))
}

/// `p ~ N(0, M)`.
pub fn sample_momentum<R: Rng + ?Sized>(mass: &MassMatrix, rng: &mut R) -> DVector<f64> {
    mass.sample(rng)
}

/// Störmer–Verlet integration of `dx/dt = M⁻¹p`, `dp/dt = −∇U(x)` for `steps` steps.
///
/// Adjacent momentum half-steps are fused, so a trajectory costs `steps + 1` gradients.
pub fn leapfrog<M: TargetModel + ?Sized>(
    model: &M,
    mass: &MassMatrix,
    start: &PhasePoint,
    config: LeapfrogConfig,
) -> Result<PhasePoint> {
    check_dim(model.dim(), start.dim())?;
    check_dim(mass.dim(), start.dim())?;
    let eps = config.epsilon;
    let mut x = start.x.clone();
    let mut p = start.p.clone();
    let mut grad = model.gradient(&x)?;
    p.axpy(-0.5 * eps, &grad, 1.0);
    for step in 1..=config.steps {
        x.axpy(eps, &mass.velocity(&p), 1.0);
        grad = model.gradient(&x)?;
        let kick = if step == config.steps { 0.5 * eps } else { eps };
        p.axpy(-kick, &grad, 1.0);
        if x.iter().chain(p.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step });
        }
    }
    Ok(PhasePoint { x, p })
}
