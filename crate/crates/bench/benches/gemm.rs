use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use tilekit::api::variants::{prepare, Variant, VariantSpec};
use tilekit::reference::naive_gemm_f32;
use tilekit_bench::{thread_counts, variant_points, DENSE_SIZES};

fn dense(c: &mut Criterion) {
    let mut g = c.benchmark_group("dense_f32");
    g.sample_size(10);
    for n in DENSE_SIZES {
        let spec = VariantSpec::new(Variant::Dense, n, n, n);
        g.throughput(Throughput::Elements(spec.flops() as u64));
        let mut p = prepare(&spec).unwrap();
        g.bench_with_input(BenchmarkId::new("tiled", n), &n, |b, _| b.iter(|| p.execute().unwrap()));
        if n <= 256 {
            let x = vec![0.5f32; n * n];
            let mut d = vec![0.0f32; n * n];
            g.bench_with_input(BenchmarkId::new("naive", n), &n, |b, _| {
                b.iter(|| naive_gemm_f32(n, n, n, black_box(&x), &x, &x, black_box(&mut d)))
            });
        }
    }
    g.finish();
}

fn variants(c: &mut Criterion) {
    let mut g = c.benchmark_group("variants_256");
    g.sample_size(10);
    for spec in variant_points(256) {
        g.throughput(Throughput::Elements(spec.flops() as u64));
        let mut p = prepare(&spec).unwrap();
        g.bench_function(spec.variant.name(), |b| b.iter(|| p.execute().unwrap()));
    }
    g.finish();
}

fn threads(c: &mut Criterion) {
    let mut g = c.benchmark_group("threads_dense_512");
    g.sample_size(10);
    for t in thread_counts() {
        let mut spec = VariantSpec::new(Variant::Dense, 512, 512, 512);
        spec.threads = t;
        let mut p = prepare(&spec).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, _| {
            b.iter(|| p.execute().unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, dense, variants, threads);
criterion_main!(benches);
