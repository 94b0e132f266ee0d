use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use emut_core::equiv::partition_catalog;
use emut_core::model::parse_model;
use emut_core::pipeline::{self, PipelineConfig};
use emut_core::pta::to_pta;
use emut_core::sim::{simulate, SimulationQuery};
use emut_core::testing::build_kill_matrix;
use rayon::ThreadPool;

const DEMO: &str = include_str!("../../../models/demo.eam");

fn pools() -> Vec<(String, ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let n = default.current_num_threads();
    vec![
        ("single-thread".into(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        (format!("pool-{n}"), default),
    ]
}

fn stages(c: &mut Criterion) {
    let model = parse_model(DEMO).unwrap();
    let cfg = PipelineConfig { runs: 50, ..PipelineConfig::default() };
    let net = to_pta(&model);
    let catalog = pipeline::mutate(&model, &cfg);
    let suite = pipeline::tests(&model, &cfg).unwrap();
    let partition = partition_catalog(&catalog, &cfg.equiv()).unwrap();

    let mut group = c.benchmark_group("simulate");
    for (threads, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(&threads), &pool, |b, pool| {
            b.iter(|| pool.install(|| simulate(black_box(&net), &SimulationQuery::new(200, 500), 1).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("equivalence");
    group.sample_size(10);
    for (threads, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(&threads), &pool, |b, pool| {
            b.iter(|| pool.install(|| partition_catalog(black_box(&catalog), &cfg.equiv()).unwrap().verdicts.len()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("kill_matrix");
    group.sample_size(10);
    for (threads, pool) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(&threads), &pool, |b, pool| {
            b.iter(|| pool.install(|| build_kill_matrix(black_box(&suite), &partition.live, cfg.threshold).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, stages);
criterion_main!(benches);
