use std::f64::consts::LN_2;
use std::hint::black_box;

use cascade_dim::boxdim::estimate_image_boxdim_seeds;
use cascade_dim::cascade::{Cascade, CascadeConfig};
use cascade_dim::sets::PointSetSpec;
use cascade_dim::theory::bounds_table_with;
use cascade_dim::{Exec, WeightModel};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn model() -> WeightModel {
    WeightModel::log_normal(LN_2).unwrap()
}

fn theory(c: &mut Criterion) {
    let grid: Vec<f64> = (0..200)
        .map(|i| 0.05 + 4.95 * f64::from(i) / 199.0)
        .collect();
    let mut g = c.benchmark_group("bounds_table_200");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| bounds_table_with(&model(), black_box(&grid), exec).unwrap())
        });
    }
    g.finish();
}

fn total_mass(c: &mut Criterion) {
    let mut g = c.benchmark_group("total_mass_k20");
    for (name, exec) in MODES {
        let cascade = Cascade::new(CascadeConfig::new(model(), 7, 20))
            .unwrap()
            .with_exec(exec);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(&cascade).total_mass())
        });
    }
    g.finish();
}

fn path_counts(c: &mut Criterion) {
    let mut g = c.benchmark_group("path_counts_k18");
    for (name, exec) in MODES {
        let cascade = Cascade::new(CascadeConfig::new(model(), 7, 18))
            .unwrap()
            .with_exec(exec);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                cascade
                    .large_product_counts(18, black_box(0.25), 0.05)
                    .unwrap()
            })
        });
    }
    g.finish();
}

fn image_boxdim(c: &mut Criterion) {
    let spec = PointSetSpec::power_sequence(1.0, 0).unwrap();
    let exps: Vec<u32> = (1..=12).collect();
    let seeds: Vec<u64> = (0..4).collect();
    let template = Cascade::new(CascadeConfig::new(model(), 0, 18)).unwrap();
    let mut g = c.benchmark_group("image_boxdim_4_seeds_k18");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                estimate_image_boxdim_seeds(&template, &seeds, &spec, &exps, Some((5, 10)), exec)
                    .unwrap()
            })
        });
    }
    g.finish();
}

criterion_group!(benches, theory, total_mass, path_counts, image_boxdim);
criterion_main!(benches);
