use std::path::Path;

use criterion::{criterion_group, criterion_main, Criterion};
use gridsched::model::load_model;
use gridsched::scenarios::{run_case, Case, RunOptions};

fn irradiance_sweep(c: &mut Criterion) {
    let path = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/reference.json"));
    let (model, config) = load_model(path).expect("shipped dataset loads");
    let values = Case::Irradiance.table();
    let mut group = c.benchmark_group("irradiance_sweep");
    group.sample_size(10);
    for (name, workers) in [("sequential", 1), ("rayon", 0)] {
        let opts = RunOptions {
            workers,
            ..RunOptions::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| run_case(&model, &config, Case::Irradiance, &values, &opts).expect("sweep solves"))
        });
    }
    group.finish();
}

criterion_group!(benches, irradiance_sweep);
criterion_main!(benches);
