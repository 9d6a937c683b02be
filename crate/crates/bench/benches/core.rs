use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lcdvf_core::pipeline::{build_force, default_params, Profile};
use lcdvf_core::shapes::{synthetic_mask, ShapeKind};
use lcdvf_core::{
    circumscribed_circle, edt_brute, edt_exact, evolve, mask_to_dt, rasterize, segment, FieldSource, InitSpec,
};

fn distance(c: &mut Criterion) {
    let mut g = c.benchmark_group("edt");
    for size in [64, 128, 256] {
        let mask = synthetic_mask(ShapeKind::Star, size);
        let boundary = mask.boundary_pixels();
        g.bench_with_input(BenchmarkId::new("exact", size), &size, |b, &n| {
            b.iter(|| edt_exact(black_box(&boundary), n, n).unwrap())
        });
        if size <= 128 {
            g.bench_with_input(BenchmarkId::new("brute", size), &size, |b, &n| {
                b.iter(|| edt_brute(black_box(&boundary), n, n).unwrap())
            });
        }
    }
    g.finish();
}

fn raster(c: &mut Criterion) {
    let mut g = c.benchmark_group("rasterize");
    for size in [128, 512] {
        let mask = synthetic_mask(ShapeKind::Disk, size);
        let contour = circumscribed_circle(&mask).unwrap().to_contour(100, size, size).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(size), &size, |b, &n| {
            b.iter(|| rasterize(black_box(&contour), n, n).unwrap())
        });
    }
    g.finish();
}

fn snake(c: &mut Criterion) {
    let mask = synthetic_mask(ShapeKind::Star, 128);
    let profile = Profile::Building;
    let config = profile.config();
    let params = default_params(&mask).unwrap();
    let force = build_force(&mask, &FieldSource::Lcdvf, config.clip_norm).unwrap();
    let init = circumscribed_circle(&mask).unwrap().to_contour(config.node_count, 128, 128).unwrap();

    c.bench_function("dt_and_force_128", |b| {
        b.iter(|| {
            mask_to_dt(black_box(&mask)).unwrap();
            build_force(black_box(&mask), &FieldSource::Lcdvf, config.clip_norm).unwrap()
        })
    });
    c.bench_function("evolve_128", |b| {
        b.iter(|| evolve(black_box(&init), &force, &params, &config).unwrap())
    });
    c.bench_function("segment_128", |b| {
        b.iter(|| {
            segment(
                black_box(&mask),
                &FieldSource::Lcdvf,
                &InitSpec::Exact(profile.init_mode()),
                &params,
                &config,
                Some(&mask),
            )
            .unwrap()
        })
    });
}

criterion_group!(benches, distance, raster, snake);
criterion_main!(benches);
