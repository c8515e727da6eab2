mod common;

use common::*;
use mces_core::diagnostics::{autocorrelation, ess, ess_per_l, performance_ratio, summarize};
use mces_core::hamiltonian::LeapfrogConfig;
use mces_core::models::GaussianTarget;
use mces_core::sampler::{run_standard_hmc, update_covariance, Leapfrog, RunningCovariance};
use mces_core::{chain_rng, linalg, MassMatrix, Trace};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let innovation = (1.0 - phi * phi).sqrt();
    let mut x: f64 = StandardNormal.sample(&mut r);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut r);
            x = phi * x + innovation * z;
            x
        })
        .collect()
}

#[test]
fn ar1_effective_sample_size() {
    for (phi, tol) in [(0.5, 0.10), (0.9, 0.15)] {
        let n = 100_000;
        let expected = (1.0 - phi) / (1.0 + phi);
        for seed in 0..5 {
            let ratio = ess(&ar1(phi, n, seed)).unwrap() / n as f64;
            assert!((ratio - expected).abs() <= tol * expected, "phi={phi}: {ratio} vs {expected}");
        }
    }
}

#[test]
fn ess_of_independent_draws_is_near_n() {
    let series = ar1(0.0, 20_000, 4);
    let e = ess(&series).unwrap();
    assert!(e > 0.0 && e <= 20_000.0 * 1.05 && e > 17_000.0, "{e}");
}

#[test]
fn ess_per_l_divides_by_mean_steps() {
    let target = GaussianTarget::standard(2);
    let step = LeapfrogConfig::new(0.3, 5).unwrap();
    let trace = run_standard_hmc(&target, &Leapfrog, &DVector::zeros(2), &MassMatrix::identity(2), step, 2000, &mut chain_rng(2, 0)).unwrap();
    let report = ess_per_l(&trace, 100).unwrap();
    assert_eq!(report.n_samples, 1900);
    assert_eq!(report.mean_steps, 5.0);
    for j in 0..2 {
        assert!((report.ess_per_l[j] * 5.0 - report.ess[j]).abs() < 1e-9);
        assert!(report.ess[j] > 0.0 && report.ess[j] <= 1900.0 * 1.05);
    }
    let csv = report.to_csv();
    assert!(csv.starts_with("dim,ess,ess_per_l\n0,"));
    assert!(ess_per_l(&trace, 2000).is_err());
    assert_eq!(performance_ratio(&report.ess_per_l, &report.ess_per_l).unwrap(), 1.0);
    let s = summarize(&trace, 100).unwrap();
    assert!(s.mean.iter().all(|m| m.abs() < 0.2) && s.sd.iter().all(|v| (v - 1.0).abs() < 0.15));
}

#[test]
fn running_covariance_matches_batch() {
    let mut r = rng(12);
    let rows: Vec<Vec<f64>> = (0..1000)
        .map(|_| normal_vector(4, 3.0, &mut r).iter().enumerate().map(|(j, v)| v + j as f64 * 10.0).collect())
        .collect();
    let mut rc = RunningCovariance::new(4);
    for chunk in rows.chunks(137) {
        rc = update_covariance(rc, chunk.iter().map(|v| v.as_slice())).unwrap();
        let seen = rc.count();
        let batch = DMatrix::from_fn(seen, 4, |i, j| rows[i][j]);
        let direct = linalg::sample_covariance(&batch);
        assert!((rc.covariance() - direct).amax() <= 1e-8);
    }
    let mut two = RunningCovariance::new(2);
    two.push(&[0.0, 0.0]).unwrap();
    assert_eq!(two.covariance(), DMatrix::zeros(2, 2));
    two.push(&[2.0, 0.0]).unwrap();
    assert_eq!(two.mean().as_slice(), &[1.0, 0.0]);
    assert_eq!(two.covariance(), DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]));
}

fn short_trace(seed: u64, n: usize, dim: usize) -> Trace {
    let target = GaussianTarget::standard(dim);
    let step = LeapfrogConfig::new(0.7, 3).unwrap();
    run_standard_hmc(&target, &Leapfrog, &DVector::zeros(dim), &MassMatrix::identity(dim), step, n, &mut chain_rng(seed, 0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ess_is_affine_invariant(seed in 0u64..1000, scale in 0.01f64..100.0, shift in -1e3f64..1e3) {
        let series = ar1(0.6, 2000, seed);
        let moved: Vec<f64> = series.iter().map(|x| scale * x + shift).collect();
        let (a, b) = (ess(&series).unwrap(), ess(&moved).unwrap());
        prop_assert!((a - b).abs() <= 1e-6 * a, "{a} vs {b}");
    }

    #[test]
    fn autocorrelation_is_bounded(seed in 0u64..1000, phi in -0.95f64..0.95, lag in 0usize..200) {
        let series = ar1(phi, 500, seed);
        let rho = autocorrelation(&series, lag).unwrap();
        prop_assert!((-1.0..=1.0).contains(&rho));
        if lag == 0 {
            prop_assert!((rho - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ess_stays_below_sample_count(seed in 0u64..1000, phi in -0.9f64..0.99) {
        let series = ar1(phi, 1000, seed);
        let e = ess(&series).unwrap();
        prop_assert!(e > 0.0 && e <= 1000.0 * 1.05);
    }

    #[test]
    fn trace_csv_round_trips(seed in 0u64..1000, n in 1usize..80, dim in 1usize..5) {
        let trace = short_trace(seed, n, dim);
        let text = trace.to_csv();
        let back = Trace::from_csv(&text).unwrap();
        prop_assert!(back.same_chain(&trace));
        prop_assert_eq!(back.to_csv(), text);
    }
}

#[test]
fn csv_keeps_extreme_values_and_rejects_garbage() {
    let text = "iter,accepted,L,delta_H,x_0\n0,1,3,-1.0000000000000000e-300,1.7976931348623157e308\n1,0,3,inf,-5.0000000000000000e-324\n";
    let trace = Trace::from_csv(text).unwrap();
    assert_eq!(trace.sample(0)[0], f64::MAX);
    assert_eq!(trace.sample(1)[0], -5e-324);
    assert!(trace.is_divergent(1));
    let again = Trace::from_csv(&trace.to_csv()).unwrap();
    assert!(again.same_chain(&trace));
    assert!(Trace::from_csv("iter,accepted,L,delta_H,x_0\n0,1,3,0.5\n").is_err());
    assert!(Trace::from_csv("iter,accepted,L\n").is_err());
    assert!(Trace::from_csv("iter,accepted,L,delta_H,x_0\n0,maybe,3,0.5,1\n").is_err());
}
