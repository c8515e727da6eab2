//! Hamiltonian Monte Carlo tuned by the maximum conditional entropy criterion.
//!
//! The crate is split along the lines of the algorithm:
//!
//! * [`models`]: differentiable targets (`U(x) = -log pi(x)`) and the benchmark models,
//! * [`hamiltonian`]: phase-space energies, the mass matrix and the leapfrog integrator,
//! * [`gaussian_theory`]: closed-form Gaussian flow, the conditional covariance of the
//!   proposal and the optimal integration times,
//! * [`sampler`]: the Metropolis kernel, plain HMC and the adaptive MCES algorithm,
//! * [`diagnostics`]: autocorrelation, effective sample size and posterior summaries,
//! * [`parallel`]: data-parallel helpers with a sequential fallback.

pub mod diagnostics;
pub mod error;
pub mod gaussian_theory;
pub mod hamiltonian;
pub mod linalg;
pub mod models;
pub mod parallel;
pub mod sampler;

pub use error::{Error, Result};
pub use hamiltonian::{MassMatrix, PhasePoint};
pub use models::TargetModel;
pub use sampler::{MCESConfig, Trace};

/// Seeded generator used by every chain. ChaCha keeps streams reproducible across platforms.
pub type ChainRng = rand_chacha::ChaCha8Rng;

/// Generator for chain `index` of a run seeded with `seed`. Distinct indices get
/// independent ChaCha streams.
pub fn chain_rng(seed: u64, index: u64) -> ChainRng {
    use rand::SeedableRng;
    let mut rng = ChainRng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
