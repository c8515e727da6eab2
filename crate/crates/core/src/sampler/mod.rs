//! The Metropolis–Hastings HMC kernel, fixed-parameter HMC and the adaptive MCES loop.

mod config;
mod covariance;
mod kernel;
mod mces;
mod trace;

pub use config::MCESConfig;
pub use covariance::{update_covariance, RunningCovariance};
pub use kernel::{hmc_step, run_standard_hmc, ExactGaussianFlow, Integrator, Leapfrog, StepOutcome, DIVERGENCE_THRESHOLD};
pub use mces::{mces_run, run_chains, MCESState};
pub use trace::{AdaptationEvent, MassUpdate, Trace};
