use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use eprsim_core::models::{ModelKind, ModelSpec, Ordering};
use eprsim_core::spin::{sample_singlet, sequential_sample, Direction};
use eprsim_core::stats::StreamFamily;

fn bench_streams(c: &mut Criterion) {
    let family = StreamFamily::new(1, "bench");
    let mut i = 0u64;
    c.bench_function("stream_derivation", |b| {
        b.iter(|| {
            i += 1;
            black_box(family.stream(black_box(i)))
        })
    });
}

fn bench_spin(c: &mut Criterion) {
    let family = StreamFamily::new(2, "bench-spin");
    let mut rng = family.stream(0);
    let (a, m) = (Direction::planar(0.3), Direction::planar(1.7));
    c.bench_function("sequential_sample", |b| {
        b.iter(|| sequential_sample(black_box(&a), black_box(&m), &mut rng))
    });
    c.bench_function("sample_singlet", |b| {
        b.iter(|| sample_singlet(black_box(&a), black_box(&m), &mut rng))
    });
}

fn bench_models(c: &mut Criterion) {
    let family = StreamFamily::new(3, "bench-models");
    let (a, b) = (Direction::planar(0.3), Direction::planar(1.7));
    let mut group = c.benchmark_group("measure_pair");
    for kind in ModelKind::ALL {
        let spec = ModelSpec::with_defaults(kind);
        let mut i = 0u64;
        group.bench_function(kind.name(), |bencher| {
            bencher.iter(|| {
                i += 1;
                let mut rng = family.stream(i);
                let mut state = spec.prepare(&mut rng);
                spec.measure_pair(&mut state, &a, &b, Ordering::AliceFirst, &mut rng)
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_streams, bench_spin, bench_models);
criterion_main!(benches);
