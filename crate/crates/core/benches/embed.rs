use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use vsa_automata::embed;
use vsa_automata::testgen::layered_vsa;

fn embed_scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("embed");
    for target in [1_000usize, 10_000, 100_000] {
        let (mut store, root) = layered_vsa(target / 9);
        let normalized = store.normalize(root).unwrap();
        let size = normalized.size();
        group.throughput(Throughput::Elements((size.nodes() + size.edges()) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(target), &normalized, |b, n| {
            b.iter(|| embed(n).unwrap())
        });
    }
    group.finish();
}

fn normalize_scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("normalize");
    for target in [1_000usize, 10_000, 100_000] {
        group.bench_function(BenchmarkId::from_parameter(target), |b| {
            b.iter_batched(
                || layered_vsa(target / 9),
                |(mut store, root)| store.normalize(root).unwrap(),
                criterion::BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, embed_scaling, normalize_scaling);
criterion_main!(benches);
