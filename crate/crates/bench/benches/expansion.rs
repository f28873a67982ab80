use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hardcore::{
    enumerate_clusters, exact_z, truncated_expansion, ursell, ClusterLimits, Fugacities,
};
use hardcore_bench::{certified_fugacities, graph, ursell_inputs, EXACT_GRAPHS, EXPANSION_CUTOFFS};

fn cluster_enumeration(c: &mut Criterion) {
    let lam = certified_fugacities();
    let g = graph("even_cycle(12)");
    let mut group = c.benchmark_group("truncated_expansion/C12");
    for m in EXPANSION_CUTOFFS {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| {
                truncated_expansion(black_box(&g), &lam, m, None, ClusterLimits::default()).unwrap()
            })
        });
    }
    group.finish();

    let g = graph("random_biregular(2,3,6,0)");
    c.bench_function("enumerate_clusters/biregular(2,3,6) m=6", |b| {
        b.iter(|| enumerate_clusters(black_box(&g), &lam, 6, ClusterLimits::default()).unwrap())
    });
}

fn exact_partition_function(c: &mut Criterion) {
    let lam = Fugacities::new(1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("exact_z");
    for spec in EXACT_GRAPHS {
        let g = graph(spec);
        group.bench_function(spec, |b| b.iter(|| exact_z(black_box(&g), &lam).unwrap()));
    }
    group.finish();
}

fn ursell_function(c: &mut Criterion) {
    let mut group = c.benchmark_group("ursell");
    for (name, h) in ursell_inputs() {
        group.bench_function(name, |b| b.iter(|| ursell(black_box(&h)).unwrap()));
    }
    group.finish();
}

criterion_group!(
    benches,
    cluster_enumeration,
    exact_partition_function,
    ursell_function
);
criterion_main!(benches);
