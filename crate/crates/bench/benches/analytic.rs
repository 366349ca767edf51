use std::hint::black_box;

use beamharvest_core::{HarvestLaw, SystemParams};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn law_evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("harvest_law");
    for antennas in [2usize, 4, 8] {
        let p = SystemParams::default().with_antennas(antennas);
        let law = HarvestLaw::new(&p).unwrap();
        let xs: Vec<f64> = (0..64).map(|i| i as f64 * 3.0 * p.energy_threshold / 63.0).collect();
        group.bench_with_input(BenchmarkId::new("cdf_64pts", antennas), &xs, |b, xs| {
            b.iter(|| xs.iter().map(|&x| law.cdf(black_box(x)).unwrap()).sum::<f64>())
        });
        group.bench_with_input(BenchmarkId::new("pdf_64pts", antennas), &xs, |b, xs| {
            b.iter(|| xs.iter().map(|&x| law.pdf(black_box(x)).unwrap()).sum::<f64>())
        });
        group.bench_function(BenchmarkId::new("pmf", antennas), |b| b.iter(|| black_box(&law).pmf()));
        group.bench_function(BenchmarkId::new("mean", antennas), |b| b.iter(|| black_box(&law).mean()));
        group.bench_function(BenchmarkId::new("construct", antennas), |b| {
            b.iter(|| HarvestLaw::new(black_box(&p)).unwrap().mu())
        });
    }
    group.finish();
}

criterion_group!(benches, law_evaluation);
criterion_main!(benches);
