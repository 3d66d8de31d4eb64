use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use parastokes_core::capacity::CapacityBounds;
use parastokes_core::cutoffs::phi_energy;
use parastokes_core::inequalities::estimate_cp;
use parastokes_core::numerics::{integrate, QuadratureConfig};
use parastokes_core::stokes::{ball_divergence_integral, make_unit_mass_field};
use parastokes_core::{classify_parabolicity, Exponent, ModelManifold, RadialProfile, VolumeConstant};

fn quadrature(c: &mut Criterion) {
    let cfg = QuadratureConfig::default();
    c.bench_function("integrate_oscillatory", |b| {
        b.iter(|| integrate(|t| (10.0 * t).sin() * (-t).exp(), 0.0, black_box(20.0), &cfg).unwrap())
    });
}

fn models(c: &mut Criterion) {
    let r3 = ModelManifold::euclidean(3).unwrap();
    let cusp = ModelManifold::cusp();
    let e = Exponent::new(3.0).unwrap();
    c.bench_function("a_p_integral_r3", |b| {
        b.iter(|| r3.a_p_integral(e, 1.0, black_box(50.0)).unwrap())
    });
    c.bench_function("capacity_bounds_cusp", |b| {
        b.iter(|| CapacityBounds::compute(&cusp, e, 1.0, black_box(4.0), VolumeConstant::TwoPowP).unwrap())
    });
    c.bench_function("phi_energy_r3", |b| {
        b.iter(|| phi_energy(&r3, e, 1.0, black_box(2.0)).unwrap())
    });
    c.bench_function("classify_parabolicity_cusp", |b| {
        b.iter(|| classify_parabolicity(&cusp, black_box(e)).unwrap())
    });
}

fn fields(c: &mut Criterion) {
    let r3 = ModelManifold::euclidean(3).unwrap();
    let field = make_unit_mass_field(&r3, &RadialProfile::bump(2.0, 0.5, 1.0).unwrap()).unwrap();
    c.bench_function("ball_integral_unit_mass", |b| {
        b.iter(|| ball_divergence_integral(&r3, &field, black_box(8.0)).unwrap())
    });
}

fn inequalities(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_cp");
    group.sample_size(10);
    group.bench_function("p3_n3_10k", |b| {
        b.iter(|| estimate_cp(3.0, 3, black_box(10_000), 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, quadrature, models, fields, inequalities);
criterion_main!(benches);
