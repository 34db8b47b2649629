//! Identification pipeline contracts on simulated data.

use std::f64::consts::{FRAC_PI_2, PI};

use thinwg_core::geometry::{sample_screen, transform};
use thinwg_core::homogeneous::{corrections_on_points, Correction};
use thinwg_core::inversion::pipeline::STAGE_SCAN;
use thinwg_core::inversion::{run_pipeline, step1_scan, step3_h_linearized, step3_peak_width};
use thinwg_core::specfun::hankel_green;
use thinwg_core::synth::{Measured, NoiseScale};
use thinwg_core::{
    Complex64, FieldProbe, InversionConfig, NoiseModel, Point, Pose, QuadratureOptions, Result,
    Screen, ScreenSample, SimulatedProbe, WaveguideParams,
};

fn screen(samples: usize) -> Screen {
    Screen {
        samples_per_segment: samples,
        ..Screen::default()
    }
}

fn probe(h: f64, level: f64, seed: u64, samples: usize) -> SimulatedProbe {
    let p = WaveguideParams::new(h, FRAC_PI_2, 1.0).unwrap();
    let pose = Pose::new(1.0, PI / 20.0).unwrap();
    let noise = NoiseModel::new(level, NoiseScale::PerPoint).unwrap();
    SimulatedProbe::new(
        p,
        pose,
        &screen(samples),
        noise,
        seed,
        QuadratureOptions::default(),
    )
    .unwrap()
}

/// Screen data replaced by the first-order thin-core model `2 H_a + h (Phi_s + Phi_a)`.
struct FirstOrderProbe {
    samples: Vec<ScreenSample>,
    core: Vec<Point>,
    source: Point,
    h: f64,
    nbar: f64,
}

impl FieldProbe for FirstOrderProbe {
    fn samples(&self) -> &[ScreenSample] {
        &self.samples
    }

    fn measure(&self, k: f64) -> Result<Measured> {
        let phi = corrections_on_points(
            &[(Correction::PhiS, 1.0), (Correction::PhiA, 1.0)],
            k,
            1.0,
            self.nbar,
            self.source,
            &self.core,
            &QuadratureOptions::default(),
        )?;
        let values = self
            .core
            .iter()
            .zip(&phi)
            .map(|(p, f)| {
                let direct = hankel_green(k, 1.0, p.distance(&self.source))?;
                let image = hankel_green(k, 1.0, (p.x + self.source.x).hypot(p.z - self.source.z))?;
                Ok(direct - image + self.h * f)
            })
            .collect::<Result<Vec<Complex64>>>()?;
        Ok(Measured {
            k,
            values: values.into(),
        })
    }
}

/// Same measurements with the screen samples in reverse order.
struct Reversed<'a>(&'a SimulatedProbe, Vec<ScreenSample>);

impl FieldProbe for Reversed<'_> {
    fn samples(&self) -> &[ScreenSample] {
        &self.1
    }

    fn measure(&self, k: f64) -> Result<Measured> {
        let m = self.0.measure(k)?;
        let mut v = m.values.as_ref().clone();
        v.reverse();
        Ok(Measured {
            k,
            values: v.into(),
        })
    }
}

fn first_peak_only() -> InversionConfig {
    InversionConfig {
        max_peaks: 1,
        ..InversionConfig::default()
    }
}

#[test]
fn noiseless_first_resonance_within_one_refined_step() {
    let cfg = first_peak_only();
    let scan = step1_scan(&probe(0.005, 0.0, 1, 16), 1.0, &cfg).unwrap();
    let k1 = scan.khat1().unwrap();
    let step = cfg.coarse_step() / cfg.refine_factor as f64;
    assert!((k1 - 1.0).abs() <= step, "khat1 = {k1}, step {step}");
}

#[test]
fn scan_is_invariant_under_screen_reordering() {
    let cfg = first_peak_only();
    let sim = probe(0.005, 0.03, 4, 12);
    let mut rev = sim.samples().to_vec();
    rev.reverse();
    let a = step1_scan(&sim, 1.0, &cfg).unwrap();
    let b = step1_scan(&Reversed(&sim, rev), 1.0, &cfg).unwrap();
    assert_eq!(a.khat1(), b.khat1());
}

#[test]
fn windowed_data_finds_third_resonance_and_flags_the_hint() {
    let cfg = InversionConfig {
        k_min: 2.5,
        k_max: 3.5,
        max_peaks: 1,
        nbar_hint: Some(FRAC_PI_2),
        ..InversionConfig::default()
    };
    let report = run_pipeline(&probe(0.005, 0.0, 1, 12), 1.0, &cfg, None).unwrap();
    let k1 = report.khat1.unwrap();
    assert!((k1 - 3.0).abs() < 0.01, "first detected peak {k1}");
    assert!((report.nbar_hat.unwrap() - PI / 6.0).abs() < 0.01);
    assert_eq!(
        report.diagnostics.warnings.len(),
        1,
        "{:?}",
        report.diagnostics.warnings
    );
}

#[test]
fn missing_peak_is_a_stage_one_failure() {
    let cfg = InversionConfig {
        k_min: 2.2,
        k_max: 2.8,
        ..InversionConfig::default()
    };
    let report = run_pipeline(&probe(0.005, 0.0, 1, 8), 1.0, &cfg, None).unwrap();
    assert!(!report.is_complete());
    assert_eq!(report.first_failure().unwrap().stage, STAGE_SCAN);
    assert!(report.khat1.is_none() && report.x0_hat.is_none());
    assert!(report.h_hat_lin.is_none() && report.h_hat_peak.is_none());
    assert!(report.nh_hat.lin.is_none() && report.nh_hat.peak.is_none());
}

#[test]
fn linearized_thickness_inverts_its_own_model() {
    let pose = Pose::new(1.0, PI / 20.0).unwrap();
    let samples = sample_screen(&screen(8)).unwrap();
    let core = samples.iter().map(|s| transform(&pose, s.point)).collect();
    let h = 0.05;
    let probe = FirstOrderProbe {
        samples,
        core,
        source: pose.source(),
        h,
        nbar: FRAC_PI_2,
    };
    let cfg = InversionConfig::default();
    let lin = step3_h_linearized(&probe, &pose, FRAC_PI_2, 1.0, 2.99, &cfg).unwrap();
    assert!((lin.h - h).abs() < 1e-6, "h = {}", lin.h);
    assert!(lin.ratio_dispersion < 1e-6);
}

#[test]
fn linearized_thickness_at_high_noise_completes_with_diagnostics() {
    let sim = probe(0.005, 0.08, 2, 16);
    let pose = Pose::new(1.0, PI / 20.0).unwrap();
    let cfg = InversionConfig::default();
    let lin = step3_h_linearized(&sim, &pose, FRAC_PI_2, 1.0, 2.99, &cfg).unwrap();
    assert!(lin.h.is_finite() && lin.h > 0.0);
    assert!(lin.trig_margin > cfg.resonance_guard);
    assert!(lin.ratio_dispersion.is_finite() && lin.ratio_dispersion > 0.0);
}

#[test]
fn peak_width_scales_with_thickness() {
    let cfg = first_peak_only();
    let width = |h: f64| {
        let scan = step1_scan(&probe(h, 0.0, 1, 16), 1.0, &cfg).unwrap();
        step3_peak_width(&scan, cfg.beta, 1).unwrap()
    };
    let ratio = width(0.04) / width(0.02);
    assert!((ratio / 2.0 - 1.0).abs() < 0.25, "delta ratio {ratio}");
}

#[test]
fn report_json_has_fixed_keys() {
    let cfg = InversionConfig {
        k_min: 2.2,
        k_max: 2.8,
        ..InversionConfig::default()
    };
    let sim = probe(0.005, 0.0, 1, 8);
    let report = run_pipeline(&sim, 1.0, &cfg, Some(&sim.truth())).unwrap();
    let v = serde_json::to_value(&report).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    for k in [
        "khat1",
        "nbar_hat",
        "x0_hat",
        "alpha_hat",
        "h_hat_lin",
        "h_hat_peak",
        "nh_hat",
        "errors_rel",
        "diagnostics",
    ] {
        assert!(keys.contains(&k), "missing {k} in {keys:?}");
    }
    assert_eq!(keys.len(), 9);
    assert!(v["diagnostics"]["config"]["beta"].is_number());
    assert!(v["errors_rel"].is_object());
}
