use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hidaprop_bench::hidaprop::freeprop::{compose_chain, k0};
use hidaprop_bench::hidaprop::oracle::{crank_nicolson_evolve, SpatialGrid};
use hidaprop_bench::hidaprop::series::{propagate_many, SeriesConfig, Source};
use hidaprop_bench::hidaprop::transforms::UFunctional;
use hidaprop_bench::hidaprop::{Complex64, SpaceTimePoint};
use hidaprop_bench::{drive, line, mollified, packet, single_atom};
use std::hint::black_box;

fn free_kernel(c: &mut Criterion) {
    let xi = drive();
    let (target, source) = (SpaceTimePoint { x: 0.3, t: 1.2 }, SpaceTimePoint { x: -0.1, t: 0.1 });
    c.bench_function("k0 closed form", |b| b.iter(|| k0(black_box(&xi), black_box(target), source)));
    let times: Vec<f64> = (0..=16).map(|j| j as f64 / 16.0).collect();
    c.bench_function("compose 16 steps", |b| b.iter(|| compose_chain(&xi, black_box(&times))));
}

fn series(c: &mut Criterion) {
    let v = single_atom();
    let xi = drive();
    let targets = line(9);
    let source = Source::Point(SpaceTimePoint { x: 0.25, t: 0.0 });
    let mut group = c.benchmark_group("series, 9 targets");
    group.sample_size(10);
    for nodes in [32, 64] {
        let config = SeriesConfig { nodes, ..SeriesConfig::default() };
        for tol in [1e-6, 1e-8] {
            group.bench_with_input(BenchmarkId::new(format!("nodes {nodes}"), tol), &tol, |b, &tol| {
                b.iter(|| propagate_many(&v, &xi, source.clone(), &targets, tol, &config).unwrap())
            });
        }
    }
    group.finish();
}

fn grid_solver(c: &mut Criterion) {
    let psi0 = packet();
    let pot = mollified(0.1);
    let mut group = c.benchmark_group("crank-nicolson to t = 1");
    group.sample_size(10);
    for dx in [0.02, 0.01] {
        let grid = SpatialGrid::symmetric(12.0, dx).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(dx), &grid, |b, &grid| {
            b.iter(|| crank_nicolson_evolve(&psi0, &pot, grid, 1e-3, 0.0, 1.0, 2).unwrap())
        });
    }
    group.finish();
}

fn transforms(c: &mut Criterion) {
    let xi = drive();
    let z = Complex64::new(0.7, 0.2);
    let f = UFunctional::donsker(0.4, 1.0).unwrap();
    c.bench_function("donsker T-transform", |b| b.iter(|| f.t_at(black_box(&xi), z)));
    let g = UFunctional::normexp(Complex64::new(-0.7, 0.0), (0.0, 1.0)).unwrap();
    c.bench_function("normexp S-transform", |b| b.iter(|| g.s_at(black_box(&xi), z)));
}

criterion_group!(benches, free_kernel, series, grid_solver, transforms);
criterion_main!(benches);
