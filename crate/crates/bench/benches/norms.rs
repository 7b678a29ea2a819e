use std::hint::black_box;

use aplab_core::integrate::{laurent_norm_closed, mc_norm, quadrature_norm};
use aplab_core::isometry::CompositionIsometry;
use aplab_core::kernel::{pbergman_min_norm, BasisSpec, OptimizerConfig};
use aplab_core::reconstruct::{default_family, modulus_grid, reconstruct_map, SolverConfig};
use aplab_core::{BoundedDomain, LaurentPolynomial};
use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

fn norms(c: &mut Criterion) {
    let d = BoundedDomain::parse("fk_ball_prime(3)").unwrap();
    let f = LaurentPolynomial::monomial_unit(&[-1, 2]);
    let mut g = c.benchmark_group("norm");
    g.bench_function("closed", |b| b.iter(|| laurent_norm_closed(black_box(&d), &f, 3.0).unwrap()));
    g.bench_function("quadrature_64", |b| b.iter(|| quadrature_norm(black_box(&d), &f, 3.0, 64, 64).unwrap()));
    g.sample_size(10);
    g.bench_function("monte_carlo_1e5", |b| b.iter(|| mc_norm(black_box(&d), &f, 3.0, 100_000, 0).unwrap()));
    g.finish();
}

fn kernels(c: &mut Criterion) {
    let d = BoundedDomain::disc(1.0).unwrap();
    let cfg = OptimizerConfig::default();
    let z = [Complex64::new(0.5, 0.1)];
    let mut g = c.benchmark_group("kernel");
    g.sample_size(10);
    for p in [1.0, 3.0] {
        let basis = BasisSpec::tensor(&d, 10, p).unwrap();
        g.bench_function(format!("min_norm_p{p}_deg10"), |b| {
            b.iter(|| pbergman_min_norm(&d, black_box(&basis), &z, p, &cfg).unwrap())
        });
    }
    g.finish();
}

fn reconstruction(c: &mut Criterion) {
    let t = CompositionIsometry::counterexample(3, 2).unwrap();
    let family = default_family(&t, 3).unwrap();
    let grid = modulus_grid(&t.source, 4);
    let cfg = SolverConfig::default();
    let mut g = c.benchmark_group("reconstruct");
    g.sample_size(10);
    g.bench_function("counterexample_grid4", |b| b.iter(|| reconstruct_map(&t, &family, black_box(&grid), &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, norms, kernels, reconstruction);
criterion_main!(benches);
