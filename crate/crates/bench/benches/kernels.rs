use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use czframe_core::localization::anchor_field;
use czframe_core::{apply, CzKernel, Dictionary, FrameGrid, FrameGridConfig, GroupPoint, MotherWavelet, SpatialGrid};

struct Fixture {
    grid: SpatialGrid,
    dict: Dictionary,
}

fn fixture() -> Fixture {
    let grid = SpatialGrid::new(32.0, 2048).unwrap();
    let psi = MotherWavelet::new(&grid).unwrap();
    let frame = Arc::new(FrameGrid::new(&FrameGridConfig::reference(32.0), &grid).unwrap());
    let dict = Dictionary::new(psi.family(), grid, frame);
    Fixture { grid, dict }
}

fn frame_transforms(c: &mut Criterion) {
    let fx = fixture();
    let f = fx.grid.sample(|x| (-x * x / 2.0).exp());
    let coeffs = fx.dict.analyze(&f).unwrap();
    let mut g = c.benchmark_group("frame");
    g.sample_size(20);
    g.bench_function("analyze", |b| b.iter(|| fx.dict.analyze(black_box(&f)).unwrap()));
    g.bench_function("synthesize", |b| b.iter(|| fx.dict.synthesize(black_box(&coeffs)).unwrap()));
    g.finish();
}

fn operators(c: &mut Criterion) {
    let fx = fixture();
    let f = fx.grid.sample(|y| 1.0 / (1.0 + y * y));
    let mut g = c.benchmark_group("operators");
    g.sample_size(10);
    g.bench_function("hilbert_apply", |b| b.iter(|| apply(&CzKernel::hilbert(), black_box(&f)).unwrap()));
    let anchor = GroupPoint::new(2.0, 1.0).unwrap();
    g.bench_function("anchor_field", |b| {
        b.iter(|| anchor_field(&CzKernel::damped_hilbert(1.0), &fx.dict, black_box(anchor)))
    });
    g.finish();
}

criterion_group!(benches, frame_transforms, operators);
criterion_main!(benches);
