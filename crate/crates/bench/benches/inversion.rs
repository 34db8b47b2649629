use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use thinwg_bench::{dip_scan, probe};
use thinwg_core::inversion::{nelder_mead, step1_scan, step3_peak_width, NelderMeadOptions};
use thinwg_core::InversionConfig;

fn optimizer(c: &mut Criterion) {
    let opts = NelderMeadOptions::default();
    c.bench_function("nelder_mead/rosenbrock", |b| {
        b.iter(|| {
            nelder_mead(
                |v| 100.0 * (v[1] - v[0] * v[0]).powi(2) + (1.0 - v[0]).powi(2),
                black_box(&[-1.2, 1.0]),
                &opts,
            )
        })
    });
}

fn peak_width(c: &mut Criterion) {
    let scan = dip_scan(4000);
    c.bench_function("step3_peak_width/4000", |b| {
        b.iter(|| step3_peak_width(black_box(&scan), 1.0 / 3.0, 1).unwrap())
    });
}

fn resonance_scan(c: &mut Criterion) {
    // one resonance, coarse screen; the clean-field cache is rebuilt per iteration
    let cfg = InversionConfig {
        k_min: 0.8,
        k_max: 1.2,
        coarse_steps: 40,
        max_peaks: 1,
        ..InversionConfig::default()
    };
    let mut g = c.benchmark_group("step1_scan");
    g.sample_size(10);
    g.bench_function("window_0.8_1.2/screen16", |b| {
        b.iter(|| {
            let p = probe(0.005, 0.03, 8);
            step1_scan(&p, 1.0, &cfg).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, optimizer, peak_width, resonance_scan);
criterion_main!(benches);
