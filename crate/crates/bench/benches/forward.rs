use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use thinwg_bench::{core_points, params};
use thinwg_core::homogeneous::{corrections_on_points, Correction};
use thinwg_core::specfun::hankel_green;
use thinwg_core::synth::NoiseScale;
use thinwg_core::waveguide::{green_on_points, guided_roots};
use thinwg_core::{Complex64, NoiseModel, QuadratureOptions};

fn special_functions(c: &mut Criterion) {
    c.bench_function("hankel_green", |b| {
        b.iter(|| {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 1..=64 {
                acc += hankel_green(black_box(2.5), 1.0, 0.2 * i as f64).unwrap();
            }
            acc
        })
    });
}

fn guided_spectrum(c: &mut Criterion) {
    let mut g = c.benchmark_group("guided_roots");
    for h in [0.005, 0.05, 0.2] {
        let p = params(h);
        g.bench_with_input(BenchmarkId::from_parameter(h), &p, |b, p| {
            b.iter(|| guided_roots(p, black_box(4.5)).unwrap())
        });
    }
    g.finish();
}

fn green_on_screen(c: &mut Criterion) {
    let (src, pts) = core_points(64);
    let opts = QuadratureOptions::default();
    let mut g = c.benchmark_group("green_on_points");
    g.sample_size(20);
    for k in [1.0, 2.5, 4.5] {
        let p = params(0.005);
        g.bench_with_input(BenchmarkId::new("screen128", k), &k, |b, &k| {
            b.iter(|| green_on_points(&p, k, src, black_box(&pts), &opts).unwrap())
        });
    }
    g.finish();
}

fn correction_fields(c: &mut Criterion) {
    let (src, pts) = core_points(64);
    let opts = QuadratureOptions::default();
    let terms = [(Correction::PhiS, 1.0), (Correction::PhiA, 1.0)];
    let mut g = c.benchmark_group("corrections_on_points");
    g.sample_size(20);
    g.bench_function("phi_s+phi_a/screen128", |b| {
        b.iter(|| {
            corrections_on_points(
                &terms,
                black_box(2.99),
                1.0,
                std::f64::consts::FRAC_PI_2,
                src,
                &pts,
                &opts,
            )
            .unwrap()
        })
    });
    g.finish();
}

fn noise(c: &mut Criterion) {
    let clean: Vec<Complex64> = (0..128)
        .map(|i| Complex64::from_polar(1.0, 0.1 * i as f64))
        .collect();
    let m = NoiseModel::new(0.03, NoiseScale::PerPoint).unwrap();
    c.bench_function("noise_apply/128", |b| {
        b.iter(|| m.apply(black_box(&clean), 2.5, 7))
    });
}

criterion_group!(
    benches,
    special_functions,
    guided_spectrum,
    green_on_screen,
    correction_fields,
    noise
);
criterion_main!(benches);
