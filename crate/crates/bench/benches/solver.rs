use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use probemul::{
    approx_multiply, build_probe, gen_matrix, gram_matvec, matmul_exact, ApproxConfig, Distribution,
    GenSpec, ProbeSchedule, Vector,
};
use std::hint::black_box;

fn uniform(n: usize, seed: u64) -> probemul::DenseMatrix {
    gen_matrix(&GenSpec {
        n,
        distribution: Distribution::UniformSigned,
        max_mag: 1.0,
        seed,
    })
    .unwrap()
}

fn bench_gram_matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram_matvec");
    for n in [64usize, 128, 256, 512] {
        let probe = build_probe(n, &ProbeSchedule::PAPER).unwrap();
        let x = Vector::new(uniform(n, 1).into_vec()).unwrap();
        group.throughput(Throughput::Elements((n * n) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| gram_matvec(&probe.gram(), black_box(&x)).unwrap());
        });
    }
    group.finish();
}

fn bench_approx_vs_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("multiply");
    group.sample_size(10);
    for n in [64usize, 128, 256] {
        let (a, b) = (uniform(n, 2), uniform(n, 3));
        let config = ApproxConfig::new(1e-14);
        group.bench_with_input(BenchmarkId::new("approx", n), &n, |bench, _| {
            bench.iter(|| approx_multiply(black_box(&a), black_box(&b), &config).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("exact", n), &n, |bench, _| {
            bench.iter(|| matmul_exact(black_box(&a), black_box(&b)).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_gram_matvec, bench_approx_vs_exact);
criterion_main!(benches);
