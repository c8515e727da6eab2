use nalgebra::DVector;
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::hamiltonian::{LeapfrogConfig, MassMatrix};
use crate::models::TargetModel;
use crate::parallel::{self, Execution};
use crate::sampler::config::MCESConfig;
use crate::sampler::covariance::RunningCovariance;
use crate::sampler::kernel::{hmc_step, Leapfrog};
use crate::sampler::trace::{AdaptationEvent, Trace};
use crate::{chain_rng, ChainRng};

/// Mutable adaptation state of one chain.
#[derive(Debug, Clone)]
pub struct MCESState {
    pub x: DVector<f64>,
    pub mass: MassMatrix,
    pub steps: usize,
    pub steps_old: usize,
    pub acc_old: f64,
    /// `L` is still being tuned.
    pub growing: bool,
    /// At least one mass update has happened.
    pub mass_adapted: bool,
    pub misses: usize,
    /// Accept flags since the last monitoring instant.
    pub window: Vec<bool>,
    pub covariance: RunningCovariance,
}

impl MCESState {
    fn window_acceptance(&self) -> f64 {
        self.window.iter().filter(|&&a| a).count() as f64 / self.window.len() as f64
    }

    /// One pass of the `L` schedule at a monitoring instant; returns the new `L` if it moved
    /// and whether growth stopped.
    fn schedule_steps(&mut self, config: &MCESConfig, acc: f64) -> (Option<usize>, bool) {
        if !self.growing {
            return (None, false);
        }
        let before = self.steps;
        let worse = acc / (self.steps as f64) < self.acc_old / (self.steps_old as f64);
        if self.steps == config.l_max {
            self.growing = false;
            if worse {
                self.steps = self.steps_old;
            }
        } else if acc > config.acc_min && worse {
            self.misses += 1;
            if self.misses >= config.i_max {
                self.growing = false;
                self.steps = self.steps_old;
            }
        } else {
            self.acc_old = acc;
            self.steps_old = self.steps;
            self.misses = 0;
            self.steps = config.grow_steps(self.steps_old);
        }
        let changed = (self.steps != before).then_some(self.steps);
        (changed, !self.growing)
    }
}

/// Mass matrix `M = Σ̂⁻¹`, loading the diagonal harder if the first attempt fails.
fn mass_from_estimate(rc: &RunningCovariance) -> Result<MassMatrix> {
    MassMatrix::from_inverse(rc.regularized()).or_else(|_| {
        MassMatrix::from_inverse(rc.loaded(1e3)).map_err(|e| {
            Error::Numerical(format!("covariance estimate not positive definite after regularization: {e}"))
        })
    })
}

/// Runs the maximum conditional entropy sampler.
///
/// `N0` plain HMC draws (identity mass) seed the covariance estimate; the main loop then
/// integrates for time `T` with `M = Σ̂⁻¹` and `ε = T/L`. Every `N_L` iterations the
/// acceptance rate of the window drives the `L` schedule and, while fewer than `N_M`
/// samples exist, the window is folded into `Σ̂`. The trace keeps every sample including
/// the warm start.
pub fn mces_run<M, R>(model: &M, config: &MCESConfig, x_init: &DVector<f64>, rng: &mut R) -> Result<Trace>
where
    M: TargetModel + ?Sized,
    R: Rng + ?Sized,
{
    config.validate()?;
    let dim = model.dim();
    check_dim(dim, x_init.len())?;
    let mut trace = Trace::new(dim);
    trace.set_config(config.clone());

    let warm_mass = MassMatrix::identity(dim);
    let warm_step = LeapfrogConfig::from_time(config.warmstart_time, config.warmstart_steps)?;
    let mut x = x_init.clone();
    for _ in 0..config.n0 {
        let out = hmc_step(model, &warm_mass, &Leapfrog, &x, warm_step, rng)?;
        x = out.x;
        trace.push(x.as_slice(), out.accepted, warm_step.steps, out.delta_h);
    }

    let mut covariance = RunningCovariance::new(dim);
    covariance.update(trace.rows())?;
    let mass = mass_from_estimate(&covariance)?;
    trace.record_mass_update(config.n0, covariance.regularized());

    let mut state = MCESState {
        x,
        mass,
        steps: config.l0,
        steps_old: config.l0,
        acc_old: 0.0,
        growing: true,
        mass_adapted: false,
        misses: 0,
        window: Vec::with_capacity(config.n_l),
        covariance,
    };

    for t in config.n0..config.n_max {
        let step = LeapfrogConfig::from_time(config.time, state.steps)?;
        let out = hmc_step(model, &state.mass, &Leapfrog, &state.x, step, rng)?;
        state.x = out.x;
        state.window.push(out.accepted);
        trace.push(state.x.as_slice(), out.accepted, state.steps, out.delta_h);

        let count = t + 1;
        if !(count - config.n0).is_multiple_of(config.n_l) {
            continue;
        }
        let acc = state.window_acceptance();
        if count < config.n_m && (state.mass_adapted || acc > 0.0) {
            state.covariance.update((count - config.n_l..count).map(|i| trace.sample(i)))?;
            state.mass = mass_from_estimate(&state.covariance)?;
            state.mass_adapted = true;
            trace.record_mass_update(count, state.covariance.regularized());
        }
        let from = state.steps;
        let (changed, frozen) = state.schedule_steps(config, acc);
        if let Some(to) = changed {
            trace.record(AdaptationEvent::StepsChanged { at: count, from, to });
        }
        if frozen {
            trace.record(AdaptationEvent::StepsFrozen {
                at: count,
                steps: state.steps,
            });
        }
        state.window.clear();
    }
    trace.set_final_mass(state.mass.matrix());
    Ok(trace)
}

/// Runs `chains` independent chains; chain `i` draws from stream `i` of `config.seed`.
pub fn run_chains<M>(
    model: &M,
    config: &MCESConfig,
    x_init: &DVector<f64>,
    chains: usize,
    exec: Execution,
) -> Result<Vec<Trace>>
where
    M: TargetModel + ?Sized,
{
    parallel::map_indices(exec, chains, |i| {
        let mut rng: ChainRng = chain_rng(config.seed, i as u64);
        mces_run(model, config, x_init, &mut rng)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::GaussianTarget;

    fn state(config: &MCESConfig) -> MCESState {
        MCESState {
            x: DVector::zeros(1),
            mass: MassMatrix::identity(1),
            steps: config.l0,
            steps_old: config.l0,
            acc_old: 0.0,
            growing: true,
            mass_adapted: false,
            misses: 0,
            window: Vec::new(),
            covariance: RunningCovariance::new(1),
        }
    }

    #[test]
    fn schedule_grows_then_rolls_back() {
        let config = MCESConfig::default();
        let mut s = state(&config);
        // Low acceptance: always grow.
        assert_eq!(s.schedule_steps(&config, 0.1), (Some(2), false));
        assert_eq!(s.schedule_steps(&config, 0.3), (Some(3), false));
        // Above Acc_min and improving Acc/L: keep growing.
        assert_eq!(s.schedule_steps(&config, 0.95), (Some(4), false));
        assert_eq!((s.steps_old, s.acc_old), (3, 0.95));
        // Above Acc_min but Acc/L worse: with I_max = 1, freeze at the best L.
        assert_eq!(s.schedule_steps(&config, 0.97), (Some(3), true));
        assert!(!s.growing);
        assert_eq!(s.schedule_steps(&config, 0.99), (None, false));
        assert_eq!(s.steps, 3);
    }

    #[test]
    fn schedule_tolerates_misses_up_to_limit() {
        let config = MCESConfig {
            i_max: 2,
            ..MCESConfig::default()
        };
        let mut s = state(&config);
        s.schedule_steps(&config, 0.9); // L 1 -> 2, record 0.9
        assert_eq!(s.schedule_steps(&config, 0.91), (None, false));
        assert_eq!(s.misses, 1);
        assert_eq!(s.schedule_steps(&config, 0.92), (Some(1), true));
    }

    #[test]
    fn schedule_stops_at_cap() {
        let config = MCESConfig {
            l0: 4,
            l_max: 5,
            ..MCESConfig::default()
        };
        let mut s = state(&config);
        assert_eq!(s.schedule_steps(&config, 0.2), (Some(5), false));
        // At the cap and worse per step than at L = 4: roll back.
        assert_eq!(s.schedule_steps(&config, 0.21), (Some(4), true));
        let mut s = state(&config);
        s.schedule_steps(&config, 0.2);
        // At the cap and better: keep the cap.
        assert_eq!(s.schedule_steps(&config, 0.5), (None, true));
        assert_eq!(s.steps, 5);
    }

    #[test]
    fn frozen_parameters_stay_constant() {
        let target = GaussianTarget::diagonal(&[4.0, 0.25]).unwrap();
        let config = MCESConfig {
            n_max: 5000,
            seed: 4,
            ..MCESConfig::default()
        };
        let trace = mces_run(&target, &config, &DVector::zeros(2), &mut chain_rng(4, 0)).unwrap();
        assert_eq!(trace.len(), 5000);
        let frozen = trace.frozen_from();
        assert!(frozen < config.n_max);
        let last = trace.steps()[frozen];
        assert!(trace.steps()[frozen..].iter().all(|&l| l == last));
        assert!(trace.mass_updates().iter().all(|u| u.at < config.n_m));
    }

    #[test]
    fn chains_are_reproducible_in_any_execution_mode() {
        let target = GaussianTarget::standard(2);
        let config = MCESConfig {
            n0: 200,
            n_m: 400,
            n_l: 50,
            n_max: 800,
            seed: 12,
            ..MCESConfig::default()
        };
        let seq = run_chains(&target, &config, &DVector::zeros(2), 3, Execution::Sequential).unwrap();
        let par = run_chains(&target, &config, &DVector::zeros(2), 3, Execution::Parallel).unwrap();
        for (a, b) in seq.iter().zip(&par) {
            assert!(a.same_chain(b));
        }
        assert!(!seq[0].same_chain(&seq[1]));
    }
}
