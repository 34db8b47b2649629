//! Shared fixtures for the benchmarks: the reference waveguide, pose and
//! screen, mapped to the core frame.

use std::f64::consts::{FRAC_PI_2, PI};

use thinwg_core::geometry::{sample_screen, transform};
use thinwg_core::inversion::{Peak, ResonanceScan};
use thinwg_core::synth::NoiseScale;
use thinwg_core::{
    NoiseModel, Point, Pose, QuadratureOptions, Screen, SimulatedProbe, WaveguideParams,
};

pub fn params(h: f64) -> WaveguideParams {
    WaveguideParams::new(h, FRAC_PI_2, 1.0).expect("reference parameters are valid")
}

pub fn pose() -> Pose {
    Pose::new(1.0, PI / 20.0).expect("reference pose is valid")
}

/// Reference screen with `samples` points per segment.
pub fn screen(samples: usize) -> Screen {
    Screen {
        samples_per_segment: samples,
        ..Screen::default()
    }
}

/// Source and screen points in the core frame.
pub fn core_points(samples: usize) -> (Point, Vec<Point>) {
    let pose = pose();
    let pts = sample_screen(&screen(samples))
        .expect("reference screen is valid")
        .iter()
        .map(|s| transform(&pose, s.point))
        .collect();
    (pose.source(), pts)
}

pub fn probe(h: f64, level: f64, samples: usize) -> SimulatedProbe {
    let noise = NoiseModel::new(level, NoiseScale::PerPoint).expect("valid noise level");
    SimulatedProbe::new(
        params(h),
        pose(),
        &screen(samples),
        noise,
        1,
        QuadratureOptions::default(),
    )
    .expect("reference screen lies off the core")
}

/// Lorentzian dip at `k = 1` sampled on `n` points over `[0.5, 1.5]`.
pub fn dip_scan(n: usize) -> ResonanceScan {
    let samples = (0..n)
        .map(|i| {
            let k = 0.5 + i as f64 / (n - 1) as f64;
            (k, 1.0 - 1.0 / (1.0 + ((k - 1.0) / 1e-3).powi(2)))
        })
        .collect();
    let peak = Peak {
        p: 1,
        k_coarse: 1.0,
        k_hat: 1.0,
        e_min: 0.0,
        derivative_norm: 0.0,
        prominent: true,
    };
    ResonanceScan::from_samples(samples, vec![peak])
}
