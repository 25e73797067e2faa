//! Sequential vs rayon grid search on a small synthetic problem.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hlsmm::experiments::{grid_search, Grids, Validation};
use hlsmm::par::Execution;
use hlsmm::synthetic::{generate, SyntheticSpec};
use hlsmm::Hyperparams;

fn bench_grid(c: &mut Criterion) {
    let (train, _) = generate(&SyntheticSpec {
        samples: 120,
        seed: 1,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let (test, _) = generate(&SyntheticSpec {
        samples: 60,
        seed: 2,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let base = Hyperparams {
        maxit: 200,
        ..Hyperparams::default()
    };
    let grids = Grids {
        beta: vec![0.01, 0.1, 0.5],
        sigma: vec![0.01, 0.1],
        rank: vec![1, 2],
        tau1: vec![1e-3],
        tau2: vec![1e-4, 1e-2],
        tau3: vec![1e-3],
    };

    let mut group = c.benchmark_group("grid_search_24");
    group.sample_size(10);
    for (name, mode) in [
        ("sequential", Execution::Sequential),
        ("parallel", Execution::Parallel),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| grid_search(&train, Validation::Holdout(&test), &grids, &base, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_grid);
criterion_main!(benches);
