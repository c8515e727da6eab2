mod common;

use common::*;
use mces_core::gaussian_theory::{analytic_flow, random_commuting_pair};
use mces_core::hamiltonian::{leapfrog, sample_momentum, total_energy, LeapfrogConfig};
use mces_core::models::{GaussianTarget, RosenbrockTarget, TargetModel};
use mces_core::sampler::{hmc_step, ExactGaussianFlow, Leapfrog, DIVERGENCE_THRESHOLD};
use mces_core::{MassMatrix, PhasePoint};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn correlated_gaussian() -> GaussianTarget {
    let cov = DMatrix::from_row_slice(3, 3, &[2.0, 0.6, 0.0, 0.6, 1.0, 0.3, 0.0, 0.3, 0.5]);
    GaussianTarget::new(DVector::from_vec(vec![0.5, -1.0, 2.0]), cov).unwrap()
}

/// Round-trip error, or `None` when the forward trajectory diverges (the sampler rejects those).
fn round_trip<M: TargetModel>(model: &M, mass: &MassMatrix, start: &PhasePoint, step: LeapfrogConfig) -> Option<f64> {
    let end = leapfrog(model, mass, start, step).ok()?;
    let dh = total_energy(&end, model, mass).ok()? - total_energy(start, model, mass).ok()?;
    if !(dh.abs() <= DIVERGENCE_THRESHOLD) {
        return None;
    }
    let back = leapfrog(model, mass, &end.flipped(), step).ok()?.flipped();
    Some((&back.x - &start.x).amax().max((&back.p - &start.p).amax()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leapfrog_is_reversible(seed in 0u64..10_000, eps in 0.01f64..0.2, steps in 1usize..60) {
        let mut r = rng(seed);
        let step = LeapfrogConfig::new(eps, steps).unwrap();

        let gauss = correlated_gaussian();
        let mass = MassMatrix::new(DMatrix::from_row_slice(3, 3, &[1.5, 0.2, 0.0, 0.2, 1.0, 0.0, 0.0, 0.0, 2.0])).unwrap();
        let start = PhasePoint::new(normal_vector(3, 1.0, &mut r), normal_vector(3, 1.0, &mut r)).unwrap();
        if let Some(err) = round_trip(&gauss, &mass, &start, step) {
            prop_assert!(err <= 1e-10, "gaussian round trip error {err:e}");
        }

        let rosen = RosenbrockTarget::new(0.3).unwrap();
        let start = PhasePoint::new(normal_vector(2, 0.5, &mut r), normal_vector(2, 1.0, &mut r)).unwrap();
        if let Some(err) = round_trip(&rosen, &MassMatrix::diagonal(&[1.0, 100.0]).unwrap(), &start, step) {
            prop_assert!(err <= 1e-10, "rosenbrock round trip error {err:e}");
        }

        let schools = eight_schools();
        let start = PhasePoint::new(normal_vector(10, 1.0, &mut r), normal_vector(10, 1.0, &mut r)).unwrap();
        if let Some(err) = round_trip(&schools, &MassMatrix::identity(10), &start, step) {
            prop_assert!(err <= 1e-10, "eight schools round trip error {err:e}");
        }
    }
}

/// Determinant of the one-step map's Jacobian, estimated by central differences.
fn jacobian_det<M: TargetModel>(model: &M, mass: &MassMatrix, start: &PhasePoint, eps: f64) -> f64 {
    let n = start.dim();
    let step = LeapfrogConfig::new(eps, 1).unwrap();
    let h = 1e-6;
    let mut jac = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..2 * n {
        let shifted = |sign: f64| {
            let mut q = start.clone();
            if k < n {
                q.x[k] += sign * h;
            } else {
                q.p[k - n] += sign * h;
            }
            let out = leapfrog(model, mass, &q, step).unwrap();
            DVector::from_iterator(2 * n, out.x.iter().chain(out.p.iter()).copied())
        };
        jac.set_column(k, &((shifted(1.0) - shifted(-1.0)) / (2.0 * h)));
    }
    jac.determinant()
}

#[test]
fn leapfrog_preserves_volume() {
    let mut r = rng(11);
    let rosen = RosenbrockTarget::new(0.5).unwrap();
    let schools = eight_schools();
    let logistic = toy_logistic(3);
    for _ in 0..20 {
        let start = PhasePoint::new(normal_vector(2, 0.7, &mut r), normal_vector(2, 1.0, &mut r)).unwrap();
        let det = jacobian_det(&rosen, &MassMatrix::diagonal(&[1.0, 3.0]).unwrap(), &start, 0.05);
        assert!((det - 1.0).abs() <= 1e-6, "rosenbrock det {det}");

        let start = PhasePoint::new(normal_vector(10, 1.0, &mut r), normal_vector(10, 1.0, &mut r)).unwrap();
        let det = jacobian_det(&schools, &MassMatrix::identity(10), &start, 0.1);
        assert!((det - 1.0).abs() <= 1e-6, "eight schools det {det}");

        let start = PhasePoint::new(normal_vector(5, 0.5, &mut r), normal_vector(5, 1.0, &mut r)).unwrap();
        let det = jacobian_det(&logistic, &MassMatrix::identity(5), &start, 0.05);
        assert!((det - 1.0).abs() <= 1e-6, "logistic det {det}");
    }
}

/// Largest energy deviation along a standard-normal trajectory of total time 1.
fn max_energy_error(eps: f64) -> f64 {
    let model = GaussianTarget::standard(1);
    let mass = MassMatrix::identity(1);
    let step = LeapfrogConfig::new(eps, 1).unwrap();
    let mut q = PhasePoint::new(DVector::from_element(1, 1.0), DVector::from_element(1, 0.5)).unwrap();
    let h0 = total_energy(&q, &model, &mass).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..(1.0 / eps).round() as usize {
        q = leapfrog(&model, &mass, &q, step).unwrap();
        worst = worst.max((total_energy(&q, &model, &mass).unwrap() - h0).abs());
    }
    worst
}

#[test]
fn energy_error_is_second_order() {
    let eps: Vec<f64> = (0..5).map(|k| 0.1 / 2f64.powi(k)).collect();
    let pts: Vec<(f64, f64)> = eps.iter().map(|&e| (e.ln(), max_energy_error(e).ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope - 2.0).abs() <= 0.1, "slope {slope}");
}

#[test]
fn harmonic_oscillator_endpoint() {
    let model = GaussianTarget::standard(1);
    let start = PhasePoint::new(DVector::from_element(1, 1.0), DVector::zeros(1)).unwrap();
    let end = leapfrog(&model, &MassMatrix::identity(1), &start, LeapfrogConfig::new(0.1, 16).unwrap()).unwrap();
    assert!((end.x[0] - 1.6f64.cos()).abs() < 0.01);
    assert!((end.p[0] + 1.6f64.sin()).abs() < 0.01);
}

#[test]
fn leapfrog_converges_to_exact_flow() {
    let mut r = rng(3);
    for _ in 0..5 {
        let (target, mass) = random_commuting_pair(4, &mut r).unwrap();
        let start = PhasePoint::new(normal_vector(4, 1.0, &mut r), normal_vector(4, 1.0, &mut r)).unwrap();
        let t = 0.9;
        let steps = (t / 1e-4f64).round() as usize;
        let numeric = leapfrog(&target, &mass, &start, LeapfrogConfig::from_time(t, steps).unwrap()).unwrap();
        let exact = analytic_flow(&target, &mass, &start, t).unwrap();
        assert!((&numeric.x - &exact.x).norm() < 1e-6, "{}", (&numeric.x - &exact.x).norm());
    }
}

#[test]
fn acceptance_tends_to_one_with_more_steps() {
    let target = correlated_gaussian();
    let mass = MassMatrix::identity(3);
    let mut rates = Vec::new();
    for steps in [4, 16, 64, 256] {
        let mut r = rng(17);
        let step = LeapfrogConfig::from_time(1.2, steps).unwrap();
        let mut x = target.mean().clone();
        let mut mean_prob = 0.0;
        for _ in 0..2000 {
            let out = hmc_step(&target, &mass, &Leapfrog, &x, step, &mut r).unwrap();
            mean_prob += (-out.delta_h).exp().min(1.0) / 2000.0;
            x = out.x;
        }
        rates.push(mean_prob);
    }
    assert!(rates.windows(2).all(|w| w[1] >= w[0]), "{rates:?}");
    assert!(rates[3] > 0.999, "{rates:?}");
}

#[test]
fn exact_flow_always_accepts() {
    let target = correlated_gaussian();
    let mass = MassMatrix::new(target.precision().clone()).unwrap();
    let integrator = ExactGaussianFlow { target: target.clone() };
    let step = LeapfrogConfig::from_time(std::f64::consts::FRAC_PI_2, 1).unwrap();
    let mut r = rng(5);
    let mut x = DVector::zeros(3);
    for _ in 0..500 {
        let out = hmc_step(&target, &mass, &integrator, &x, step, &mut r).unwrap();
        assert!(out.accepted && out.delta_h.abs() < 1e-10);
        x = out.x;
    }
}

#[test]
fn unit_normal_kernel_accepts_often() {
    let target = GaussianTarget::standard(1);
    let step = LeapfrogConfig::new(0.2, 8).unwrap();
    let mut r = rng(8);
    let mut x = DVector::zeros(1);
    let mut accepted = 0;
    for _ in 0..10_000 {
        let out = hmc_step(&target, &MassMatrix::identity(1), &Leapfrog, &x, step, &mut r).unwrap();
        accepted += out.accepted as usize;
        x = out.x;
    }
    assert!(accepted as f64 / 1e4 > 0.9);
}

fn momentum_covariance(mass: &MassMatrix, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let n = mass.dim();
    let mut acc = DMatrix::zeros(n, n);
    let draws = 100_000;
    for _ in 0..draws {
        let p = sample_momentum(mass, &mut r);
        acc += &p * p.transpose();
    }
    acc / draws as f64
}

#[test]
fn momentum_draws_have_mass_covariance() {
    let diag = momentum_covariance(&MassMatrix::diagonal(&[4.0]).unwrap(), 1);
    assert!((3.8..=4.2).contains(&diag[(0, 0)]));

    let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
    for mass in [MassMatrix::new(m.clone()).unwrap(), MassMatrix::from_inverse(m.clone().try_inverse().unwrap()).unwrap()] {
        let c = momentum_covariance(&mass, 2);
        let corr = c[(0, 1)] / (c[(0, 0)] * c[(1, 1)]).sqrt();
        assert!((corr - 0.5).abs() <= 0.02, "{corr}");
    }

    let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.4, 0.1, 0.4, 1.0, 0.3, 0.1, 0.3, 3.0]);
    let c = momentum_covariance(&MassMatrix::new(m.clone()).unwrap(), 3);
    for i in 0..3 {
        assert!(((c[(i, i)] - m[(i, i)]) / m[(i, i)]).abs() < 0.05);
    }
}

