use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DMatrix;

use satlab_bench::trajectories;
use satlab_core::concepts::{averaged_covariance, pca_top2, sparsify_pc, Entity};
use satlab_core::embed::{random_weights, run_detangled, InitEmbedding, PlantedSignal};
use satlab_core::gen::random_3sat;

fn covariance(c: &mut Criterion) {
    let trajs = trajectories(4, 200, &PlantedSignal::default());
    c.bench_function("averaged_covariance_4x20_d128", |b| {
        b.iter(|| averaged_covariance(&trajs, Entity::Literal).unwrap())
    });
}

fn pca(c: &mut Criterion) {
    let s = DMatrix::<f64>::from_fn(128, 128, |i, j| ((i * 31 + j * 17) % 97) as f64 / 97.0);
    let s = (&s + s.transpose()) * 0.5;
    c.bench_function("pca_top2_d128", |b| b.iter(|| pca_top2(&s).unwrap()));
    let pc1 = pca_top2(&s).unwrap().pc1;
    c.bench_function("sparsify_pc_k16", |b| b.iter(|| sparsify_pc(&pc1, 16).unwrap()));
}

fn detangled(c: &mut Criterion) {
    let f = random_3sat(500, 2000, 1).unwrap();
    let d = 64;
    let w = random_weights(d, 1.0, 2);
    let init = InitEmbedding::Constant {
        literal: vec![1.0 / (d as f32).sqrt(); d],
        clause: vec![1.0 / (d as f32).sqrt(); d],
    };
    let mut group = c.benchmark_group("detangled");
    group.sample_size(10);
    group.bench_function("n500_d64_t5", |b| {
        b.iter(|| run_detangled(&f, &w, 5, &init).unwrap())
    });
    group.finish();
}

criterion_group!(benches, covariance, pca, detangled);
criterion_main!(benches);
