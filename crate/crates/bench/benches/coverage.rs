use criterion::{criterion_group, criterion_main, Criterion};

use ppcpcov_core::{
    coverage_probability, mc_coverage, specfun, ClusterModel, DaughterKernel, PathLoss,
    QuadratureConfig, SimConfig, SirThreshold,
};

const PI: f64 = std::f64::consts::PI;

fn tpp(sigma2: f64) -> ClusterModel {
    ClusterModel::new(0.1 / PI, 10.0, DaughterKernel::thomas(sigma2.sqrt()).unwrap()).unwrap()
}

fn bench_specfun(c: &mut Criterion) {
    c.bench_function("marcum_q1(3, 2)", |b| {
        b.iter(|| specfun::marcum_q1(std::hint::black_box(3.0), std::hint::black_box(2.0)).unwrap())
    });
    c.bench_function("rice_pdf(3, 2)", |b| {
        b.iter(|| specfun::rice_pdf(std::hint::black_box(3.0), std::hint::black_box(2.0)).unwrap())
    });
}

fn bench_kernels(c: &mut Criterion) {
    let thomas = DaughterKernel::thomas(0.7f64.sqrt()).unwrap();
    let matern = DaughterKernel::matern(2.8f64.sqrt()).unwrap();
    c.bench_function("thomas g(1.2 | 0.8)", |b| {
        b.iter(|| thomas.pdf(std::hint::black_box(1.2), std::hint::black_box(0.8)).unwrap())
    });
    c.bench_function("matern G(1.2 | 0.8)", |b| {
        b.iter(|| matern.cdf(std::hint::black_box(1.2), std::hint::black_box(0.8)).unwrap())
    });
}

fn bench_coverage(c: &mut Criterion) {
    let model = tpp(0.7);
    let pl = PathLoss::new(4.0).unwrap();
    let theta = SirThreshold::from_db(0.0).unwrap();
    let cfg = QuadratureConfig::default();
    let mut group = c.benchmark_group("coverage");
    group.sample_size(10);
    group.bench_function("analytic tpp-0.7 at 0 dB", |b| {
        b.iter(|| coverage_probability(&model, &pl, &theta, &cfg).unwrap())
    });
    group.bench_function("mc tpp-0.7, 200 reps, window 50", |b| {
        let sim = SimConfig {
            window_radius: 50.0,
            parent_buffer: None,
            replications: 200,
            seed: 1,
            thresholds: vec![theta],
        };
        b.iter(|| mc_coverage(&model, &pl, &sim).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_specfun, bench_kernels, bench_coverage);
criterion_main!(benches);
