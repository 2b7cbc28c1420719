use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use johnforge_bench::{decomposed, mask};
use johnforge_core::geometry::{distance_transform, whitney};
use johnforge_core::john::{estimate_john_constant, JohnCenter};
use johnforge_core::potential::{
    capacity_estimate, harmonic_measure_wos, CapacityMethod, WalkDomain,
};
use johnforge_core::removability::{build_test_function, nonremovability_witness, TraceSpec};
use johnforge_core::simplify::{build_graph, cut_slits};

fn geometry(c: &mut Criterion) {
    let mut g = c.benchmark_group("geometry");
    for level in [8, 9] {
        let m = mask("julia:0,1", level);
        g.bench_with_input(BenchmarkId::new("distance_transform", level), &m, |b, m| {
            b.iter(|| distance_transform(black_box(m)))
        });
        g.bench_with_input(BenchmarkId::new("whitney", level), &m, |b, m| {
            b.iter(|| whitney(black_box(m), level).unwrap())
        });
    }
    g.finish();
}

fn john(c: &mut Criterion) {
    let (_, w) = decomposed("disks:-0.5,0,0.3;0.5,0,0.3", 8);
    c.bench_function("john_estimate/64_samples", |b| {
        b.iter(|| estimate_john_constant(black_box(&w), JohnCenter::INFINITY, 64, 0).unwrap())
    });
}

fn simplify(c: &mut Criterion) {
    let (_, w) = decomposed("disks:-0.5,0,0.3;0.5,0,0.3", 8);
    let mut g = c.benchmark_group("simplify");
    g.sample_size(10);
    g.bench_function("build_graph", |b| {
        b.iter(|| build_graph(black_box(&w), 8.0, None).unwrap())
    });
    let graph = build_graph(&w, 8.0, None).unwrap();
    g.bench_function("cut_slits", |b| {
        b.iter(|| cut_slits(black_box(&w), &graph, 0.1).unwrap())
    });
    g.finish();
}

fn potential(c: &mut Criterion) {
    let mut g = c.benchmark_group("potential");
    g.sample_size(10);
    let seg = mask("segment:4", 10);
    for method in [CapacityMethod::Energy, CapacityMethod::Fekete] {
        g.bench_function(BenchmarkId::new("capacity", method), |b| {
            b.iter(|| capacity_estimate(black_box(&seg), method, 512, 0).unwrap())
        });
    }
    let circle = mask("circle:0.5", 8);
    let trace: TraceSpec = "random".parse().unwrap();
    g.bench_function("harmonic_extension", |b| {
        b.iter(|| build_test_function(black_box(&circle), &trace, 0).unwrap())
    });
    let field = distance_transform(&circle);
    let target = circle.to_bits();
    let domain = WalkDomain::Mask { field, target };
    let start = johnforge_core::geometry::Point::new(0.9, 0.0);
    let shell = 1.5 * circle.pixel_size();
    g.bench_function("walk_on_spheres/10k", |b| {
        b.iter(|| harmonic_measure_wos(black_box(&domain), start, 10_000, shell, 0).unwrap())
    });
    g.finish();
}

fn removability(c: &mut Criterion) {
    let m = mask("fat_cantor:0.1", 9);
    let mut g = c.benchmark_group("removability");
    g.sample_size(10);
    g.bench_function("witness/4_frequencies", |b| {
        b.iter(|| nonremovability_witness(black_box(&m), &[4, 8, 16, 32]).unwrap())
    });
    g.finish();
}

criterion_group!(benches, geometry, john, simplify, potential, removability);
criterion_main!(benches);
