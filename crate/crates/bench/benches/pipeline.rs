use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use goldbach_bench::reference_system;
use goldbach_core::representation_counts::{triple_self_convolution, ConvolutionStrategy};
use goldbach_core::restricted_primes::{sieve_lambda, WeightedWindow};
use goldbach_core::singular_series::{f_direct, DensityEvaluator};

fn bench_sieve(c: &mut Criterion) {
    let mut group = c.benchmark_group("sieve_lambda");
    for u in [100_000u64, 1_000_000] {
        group.bench_with_input(BenchmarkId::from_parameter(u), &u, |b, &u| {
            b.iter(|| sieve_lambda(black_box(u)).unwrap())
        });
    }
    group.finish();
}

fn bench_convolution(c: &mut Criterion) {
    let sys = reference_system();
    let mut group = c.benchmark_group("triple_convolution");
    group.sample_size(20);
    let window_small = WeightedWindow::build(&sys, 2_000).unwrap();
    group.bench_function("direct_2k", |b| {
        b.iter(|| {
            triple_self_convolution(black_box(&window_small.values), ConvolutionStrategy::Direct)
        })
    });
    group.bench_function("transform_2k", |b| {
        b.iter(|| {
            triple_self_convolution(
                black_box(&window_small.values),
                ConvolutionStrategy::Transform,
            )
        })
    });
    let window_large = WeightedWindow::build(&sys, 100_000).unwrap();
    group.bench_function("transform_100k", |b| {
        b.iter(|| {
            triple_self_convolution(
                black_box(&window_large.values),
                ConvolutionStrategy::Transform,
            )
        })
    });
    group.finish();
}

fn bench_series(c: &mut Criterion) {
    let sys = reference_system();
    c.bench_function("f_direct_q60", |b| {
        b.iter(|| f_direct(black_box(60), black_box(7), &sys).unwrap())
    });
    let density = DensityEvaluator::new(&sys, 100_000).unwrap();
    c.bench_function("density_sweep_1k_targets", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for m in (400_001..402_001u64).step_by(2) {
                acc += density.sigma_prime(black_box(m), 100_000).unwrap().value;
            }
            acc
        })
    });
}

criterion_group!(benches, bench_sieve, bench_convolution, bench_series);
criterion_main!(benches);
