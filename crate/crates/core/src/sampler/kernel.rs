use nalgebra::DVector;
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::gaussian_theory::analytic_flow;
use crate::hamiltonian::{self, LeapfrogConfig, MassMatrix, PhasePoint};
use crate::models::{GaussianTarget, TargetModel};
use crate::sampler::trace::Trace;

/// Trajectories whose energy error exceeds this are rejected and flagged as divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1000.0;

/// Moves a phase point along (an approximation of) the Hamiltonian flow.
pub trait Integrator: Sync {
    fn integrate<M: TargetModel + ?Sized>(
        &self,
        model: &M,
        mass: &MassMatrix,
        start: &PhasePoint,
        step: LeapfrogConfig,
    ) -> Result<PhasePoint>;
}

/// The leapfrog scheme.
#[derive(Debug, Clone, Copy, Default)]
pub struct Leapfrog;

impl Integrator for Leapfrog {
    fn integrate<M: TargetModel + ?Sized>(
        &self,
        model: &M,
        mass: &MassMatrix,
        start: &PhasePoint,
        step: LeapfrogConfig,
    ) -> Result<PhasePoint> {
        hamiltonian::leapfrog(model, mass, start, step)
    }
}

/// Exact flow of a Gaussian target for the total time `epsilon · L`. The model passed to
/// [`Integrator::integrate`] is only used for energies; dynamics come from `target`.
#[derive(Debug, Clone)]
pub struct ExactGaussianFlow {
    pub target: GaussianTarget,
}

impl Integrator for ExactGaussianFlow {
    fn integrate<M: TargetModel + ?Sized>(
        &self,
        _model: &M,
        mass: &MassMatrix,
        start: &PhasePoint,
        step: LeapfrogConfig,
    ) -> Result<PhasePoint> {
        analytic_flow(&self.target, mass, start, step.time())
    }
}

/// Result of one Metropolis-adjusted HMC transition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub x: DVector<f64>,
    pub accepted: bool,
    /// `H(end) − H(start)`; `+inf` when the trajectory failed.
    pub delta_h: f64,
    pub divergent: bool,
}

/// Draws `p ~ N(0, M)`, integrates, and accepts with probability `min(1, exp(−ΔH))`.
///
/// Diverging trajectories (non-finite state or `|ΔH| > 1000`) are rejected, not raised.
pub fn hmc_step<M, I, R>(
    model: &M,
    mass: &MassMatrix,
    integrator: &I,
    x: &DVector<f64>,
    step: LeapfrogConfig,
    rng: &mut R,
) -> Result<StepOutcome>
where
    M: TargetModel + ?Sized,
    I: Integrator,
    R: Rng + ?Sized,
{
    check_dim(model.dim(), x.len())?;
    let p = mass.sample(rng);
    let start = PhasePoint { x: x.clone(), p };
    let h_start = hamiltonian::total_energy(&start, model, mass)?;
    if !h_start.is_finite() {
        return Err(Error::Numerical(format!("energy at the current state is {h_start}")));
    }
    let proposal = match integrator.integrate(model, mass, &start, step) {
        Ok(end) => Some(end),
        Err(Error::Divergence { .. }) => None,
        Err(e) => return Err(e),
    };
    let u: f64 = rng.random();
    let delta_h = match &proposal {
        Some(end) => {
            let h = hamiltonian::total_energy(end, model, mass)?;
            if h.is_finite() {
                h - h_start
            } else {
                f64::INFINITY
            }
        }
        None => f64::INFINITY,
    };
    let divergent = !(delta_h.abs() <= DIVERGENCE_THRESHOLD);
    let accepted = !divergent && u < (-delta_h).exp();
    let x = match proposal {
        Some(end) if accepted => end.x,
        _ => x.clone(),
    };
    Ok(StepOutcome {
        x,
        accepted,
        delta_h,
        divergent,
    })
}

/// `n` transitions with fixed mass matrix and step configuration.
pub fn run_standard_hmc<M, I, R>(
    model: &M,
    integrator: &I,
    x_init: &DVector<f64>,
    mass: &MassMatrix,
    step: LeapfrogConfig,
    n: usize,
    rng: &mut R,
) -> Result<Trace>
where
    M: TargetModel + ?Sized,
    I: Integrator,
    R: Rng + ?Sized,
{
    check_dim(model.dim(), x_init.len())?;
    check_dim(model.dim(), mass.dim())?;
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one iteration".into()));
    }
    let mut trace = Trace::new(model.dim());
    let mut x = x_init.clone();
    for _ in 0..n {
        let out = hmc_step(model, mass, integrator, &x, step, rng)?;
        x = out.x;
        trace.push(x.as_slice(), out.accepted, step.steps, out.delta_h);
    }
    trace.set_final_mass(mass.matrix());
    Ok(trace)
}
