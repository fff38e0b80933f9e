use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use heatlab_bench::{gasket, times, traps, SEED};
use heatlab_core::kernel::{btm_kernel, ctmc_kernel, srw_kernel_discrete};
use heatlab_core::{iic_return_kernel, laplacian_spectrum, wilson_ust, BoundaryCondition, UstBoundary};

fn discrete_walk(c: &mut Criterion) {
    let mut group = c.benchmark_group("discrete-walk");
    group.sample_size(10);
    for level in [5, 6, 7] {
        let g = gasket(level).unwrap();
        group.bench_with_input(BenchmarkId::new("gasket-1000-steps", level), &g, |b, g| {
            b.iter(|| srw_kernel_discrete(g, g.root(), g.root(), 1000).unwrap())
        });
    }
    group.finish();
}

fn continuous_walk(c: &mut Criterion) {
    let g = gasket(5).unwrap();
    let grid = times(1000.0);
    c.bench_function("ctmc-gasket-5", |b| b.iter(|| ctmc_kernel(&g, g.root(), g.root(), &grid, 1e-12).unwrap()));
}

fn trap_model(c: &mut Criterion) {
    let mut group = c.benchmark_group("trap-model");
    group.sample_size(10);
    let grid = times(1e4);
    for alpha in [0.5, 2.0] {
        let env = traps(alpha, 1 << 14).unwrap();
        group.bench_with_input(BenchmarkId::new("on-diagonal-1e4", alpha), &env, |b, env| {
            b.iter(|| btm_kernel(env, &grid, 1e-6).unwrap())
        });
    }
    group.finish();
}

fn spectra(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectrum");
    group.sample_size(10);
    for level in [4, 5] {
        let g = gasket(level).unwrap();
        group.bench_with_input(BenchmarkId::new("gasket-neumann", level), &g, |b, g| {
            b.iter(|| laplacian_spectrum(g, BoundaryCondition::Neumann).unwrap())
        });
    }
    group.finish();
}

fn random_media(c: &mut Criterion) {
    let mut group = c.benchmark_group("random-media");
    group.sample_size(10);
    group.bench_function("wilson-ust-50", |b| b.iter(|| wilson_ust(50, SEED, UstBoundary::Wired).unwrap()));
    group.bench_function("iic-return-1000", |b| b.iter(|| iic_return_kernel(2, 1000, SEED, 1e-3).unwrap()));
    group.finish();
}

criterion_group!(benches, discrete_walk, continuous_walk, trap_model, spectra, random_media);
criterion_main!(benches);
