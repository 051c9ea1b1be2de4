//! Parallel-vs-sequential benchmarks for the training-side hot paths.
//!
//! With the default `parallel` feature the same work is timed inside a
//! 1-thread rayon pool and a pool sized to the machine, which is an honest
//! proxy for the sequential fallback (build with `--no-default-features` to
//! time the true fallback; the numbers land within noise of the 1-thread
//! pool).

use criterion::{criterion_group, criterion_main, Criterion};

use edm_core::classifiers::{BaseConfig, KnnConfig, Weighting};
use edm_core::cost::{build_cost_matrices, CostSpec};
use edm_core::dataset::{default_timestamps, make_synthetic};
use edm_core::triggers::{fit_stopping_rule, Trigger, TriggerConfig};
use edm_core::{classifiers, pipeline};

struct Fixture {
    train: edm_core::dataset::TimeSeriesDataset,
    test: edm_core::dataset::TimeSeriesDataset,
    cost: edm_core::cost::CostMatrices,
    base: BaseConfig,
}

fn fixture() -> Fixture {
    let train = make_synthetic(40, 80, 30, 3.0, 1.0, 7).unwrap();
    let test = make_synthetic(40, 80, 30, 3.0, 1.0, 8).unwrap();
    let timestamps = default_timestamps(80, 16);
    let cost = build_cost_matrices(CostSpec::zero_one_linear(2, timestamps, 0.5)).unwrap();
    let base = BaseConfig::Knn(KnnConfig {
        k: 5,
        weighting: Weighting::Uniform,
    });
    Fixture {
        train,
        test,
        cost,
        base,
    }
}

#[cfg(feature = "parallel")]
fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let cores = std::thread::available_parallelism().map_or(4, |n| n.get());
    [1, cores]
        .iter()
        .map(|&n| {
            (
                format!("{n}-thread"),
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .unwrap(),
            )
        })
        .collect()
}

#[cfg(feature = "parallel")]
fn bench_group<F: Fn() + Sync>(c: &mut Criterion, name: &str, work: F) {
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    for (label, pool) in pools() {
        group.bench_function(&label, |b| b.iter(|| pool.install(&work)));
    }
    group.finish();
}

#[cfg(not(feature = "parallel"))]
fn bench_group<F: Fn() + Sync>(c: &mut Criterion, name: &str, work: F) {
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(&work));
    group.finish();
}

fn bench_fit_collection(c: &mut Criterion) {
    let fx = fixture();
    bench_group(c, "fit_collection", || {
        classifiers::ClassifiersCollection::fit(&fx.train, fx.cost.timestamps(), &fx.base)
            .unwrap();
    });
}

fn bench_out_of_fold_cube(c: &mut Criterion) {
    let fx = fixture();
    bench_group(c, "out_of_fold_cube", || {
        classifiers::out_of_fold_cube(&fx.train, fx.cost.timestamps(), &fx.base, 5, 13).unwrap();
    });
}

fn bench_stopping_rule_grid(c: &mut Criterion) {
    let fx = fixture();
    let cube =
        classifiers::out_of_fold_cube(&fx.train, fx.cost.timestamps(), &fx.base, 5, 13).unwrap();
    bench_group(c, "stopping_rule_grid", || {
        fit_stopping_rule(&cube, &fx.cost).unwrap();
    });
}

fn bench_score(c: &mut Criterion) {
    let fx = fixture();
    let p = pipeline::fit_pipeline(
        &fx.train,
        &fx.cost,
        &fx.base,
        &TriggerConfig::Threshold { theta: None },
        5,
        13,
    )
    .unwrap();
    assert!(matches!(p.trigger, Trigger::Threshold(_)));
    bench_group(c, "score_online", || {
        p.score(&fx.test).unwrap();
    });
}

criterion_group!(
    benches,
    bench_fit_collection,
    bench_out_of_fold_cube,
    bench_stopping_rule_grid,
    bench_score
);
criterion_main!(benches);
