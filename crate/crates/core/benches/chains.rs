use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mces_core::diagnostics::ess_per_l_with;
use mces_core::models::GaussianTarget;
use mces_core::parallel::Execution;
use mces_core::sampler::{run_chains, MCESConfig};
use nalgebra::DVector;
use std::hint::black_box;

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn bench_chains(c: &mut Criterion) {
    let variances: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
    let target = GaussianTarget::diagonal(&variances).unwrap();
    let config = MCESConfig {
        n0: 500,
        n_max: 2500,
        n_m: 1500,
        ..MCESConfig::default()
    };
    let start = DVector::zeros(10);
    let mut group = c.benchmark_group("run_chains");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::new(name, 8), &exec, |b, &exec| {
            b.iter(|| run_chains(&target, &config, &start, 8, exec).unwrap())
        });
    }
    group.finish();

    let trace = run_chains(&target, &config, &start, 1, Execution::Sequential).unwrap().remove(0);
    let mut group = c.benchmark_group("ess_per_l");
    for (name, exec) in modes() {
        group.bench_function(name, |b| b.iter(|| ess_per_l_with(black_box(&trace), 500, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_chains);
criterion_main!(benches);
