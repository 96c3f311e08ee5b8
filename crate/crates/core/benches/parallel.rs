use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hilap::gen::{random_choice, random_tree, RandomTreeParams};
use hilap::laplacian::{assemble_dense, Mode, DEFAULT_DENSE_CAP};
use hilap::perturbation::{clt_experiment, PerturbationConfig, DEFAULT_TAIL_DEPTH};
use hilap::semigroup::{markov_checks, HeatOperator};
use rayon::{ThreadPool, ThreadPoolBuilder};

fn pools() -> Vec<(&'static str, ThreadPool)> {
    vec![
        ("sequential", ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn bench(c: &mut Criterion) {
    let params = RandomTreeParams {
        max_depth: 7,
        max_leaves: 1024,
        ..RandomTreeParams::default()
    };
    let t = (0..)
        .map(|s| random_tree(s, &params).unwrap())
        .find(|t| t.leaf_count() >= 300)
        .unwrap();
    let choice = random_choice(&t, 1, Mode::Compact).unwrap();
    let cfg = PerturbationConfig::new(0.5, 0.5, DEFAULT_TAIL_DEPTH, 1).unwrap();

    let mut g = c.benchmark_group("pool");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_with_input(BenchmarkId::new("clt_2000", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| clt_experiment(&cfg, 0, 10, 2000).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("assemble_dense", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| assemble_dense(&t, &choice, DEFAULT_DENSE_CAP).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("markov_checks", name), &pool, |b, pool| {
            let h = HeatOperator::new(&t, &choice, 1.0).unwrap();
            b.iter(|| pool.install(|| markov_checks(&h, 1.0, 0).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
