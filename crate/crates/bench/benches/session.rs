use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qkdmask::harness::{run_experiment, ExperimentSpec};
use qkdmask::{run_session, AttackStrategy, Variant};
use qkdmask_bench::completing_session;

fn sessions(c: &mut Criterion) {
    let mut group = c.benchmark_group("session");
    for n in [1_000usize, 10_000, 100_000] {
        group.throughput(Throughput::Elements(n as u64));
        for variant in [Variant::PlainBb84, Variant::Randomized, Variant::RandomizedE91] {
            let config = completing_session(variant, AttackStrategy::clone_resend(), n);
            group.bench_with_input(BenchmarkId::new(variant.as_str(), n), &config, |b, config| {
                b.iter(|| run_session(config).unwrap())
            });
        }
    }
    group.finish();
}

fn experiment(c: &mut Criterion) {
    let spec = ExperimentSpec {
        base: completing_session(Variant::Randomized, AttackStrategy::None, 4096),
        trials: 64,
        ..ExperimentSpec::default()
    };
    c.bench_function("experiment/64x4096", |b| b.iter(|| run_experiment(&spec).unwrap()));
}

criterion_group!(benches, sessions, experiment);
criterion_main!(benches);
