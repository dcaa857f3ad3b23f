use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use phspec_core::gapsolve::GapSolver;
use phspec_core::metric::Metric;
use phspec_core::{hermcheck, spectral, Complex64, EnsembleConfig};

fn ensemble(n: usize, lambda: f64) -> EnsembleConfig {
    EnsembleConfig { n, m: 1.0, metric: Metric::signature_for(lambda, n), master_seed: 7, num_samples: 1 }
}

fn sample_and_eigensolve(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_and_eigensolve");
    group.sample_size(10);
    for n in [64, 256] {
        let config = ensemble(n, 0.25);
        group.bench_with_input(BenchmarkId::from_parameter(n), &config, |b, config| {
            b.iter(|| spectral::analyze(&config.sample(0).unwrap()).unwrap())
        });
    }
    group.finish();
}

fn gap_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("gap_solve");
    let metrics = [
        ("signature", Metric::signature_for(0.25, 64)),
        ("flat", Metric::Flat { mu1: 1.0, lminus: 0.5, mu2: 2.0, lplus: 1.5 }),
    ];
    let points = [("inside", Complex64::new(0.3, 0.4)), ("outside", Complex64::new(2.0, 1.0))];
    for (name, metric) in metrics {
        let solver = GapSolver::new(metric, 1.0).unwrap();
        for (where_, w) in points {
            group.bench_function(format!("{name}/{where_}"), |b| b.iter(|| solver.classify_phase(black_box(w))));
        }
    }
    group.finish();
}

fn block_traces(c: &mut Criterion) {
    let mut group = c.benchmark_group("block_traces");
    group.sample_size(10);
    for n in [8, 64] {
        let sample = ensemble(n, 0.25).sample(0).unwrap();
        let z = Complex64::new(0.3, 0.4).sqrt();
        group.bench_with_input(BenchmarkId::from_parameter(n), &sample, |b, sample| {
            b.iter(|| hermcheck::block_traces(&sample.a_matrix, &sample.b, 0.1, z))
        });
    }
    group.finish();
}

criterion_group!(benches, sample_and_eigensolve, gap_solve, block_traces);
criterion_main!(benches);
