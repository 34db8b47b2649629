//! Step 3: core thickness from the first-order correction (strategy i)
//! and from resonance-peak widths (strategy ii).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{InversionConfig, ResonanceScan};
use crate::error::{Error, Result};
use crate::geometry::{transform, Pose};
use crate::homogeneous::{corrections_on_points, Correction};
use crate::specfun::hankel_green;
use crate::synth::FieldProbe;
use crate::Point;

/// Range over which the extrema of `E` set the peak-width threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrema {
    /// The peak's own window.
    #[default]
    Window,
    /// Every sample of the scan.
    Sweep,
}

/// Strategy (i) estimate with its conditioning diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizedThickness {
    pub h: f64,
    /// Frequency actually measured.
    pub k: f64,
    /// `min(|sin(k nbar)|, |cos(k nbar)|)`.
    pub trig_margin: f64,
    /// Smallest `|Phi_s + Phi_a|` on the screen.
    pub min_correction: f64,
    /// Weighted spread of the pointwise ratios relative to their mean; a
    /// large value means the estimate is noise-dominated.
    pub ratio_dispersion: f64,
}

/// Strategy (i): `h = |integral (G - 2 H_a) / (Phi_s + Phi_a) dt| / |S|` at `k`.
pub fn step3_h_linearized(
    probe: &dyn FieldProbe,
    pose: &Pose,
    nbar: f64,
    n_cl: f64,
    k: f64,
    cfg: &InversionConfig,
) -> Result<LinearizedThickness> {
    let (s, c) = (k * nbar).sin_cos();
    let trig_margin = s.abs().min(c.abs());
    if trig_margin < cfg.resonance_guard {
        return Err(Error::Resonant {
            k,
            what: "linearized thickness (trig factor below guard)",
        });
    }
    let m = probe.measure(k)?;
    let samples = probe.samples();
    let core: Vec<Point> = samples.iter().map(|s| transform(pose, s.point)).collect();
    let source = pose.source();
    let phi = corrections_on_points(
        &[(Correction::PhiS, 1.0), (Correction::PhiA, 1.0)],
        m.k,
        n_cl,
        nbar,
        source,
        &core,
        &cfg.quadrature,
    )?;
    let mut ratios = Vec::with_capacity(core.len());
    let mut min_correction = f64::INFINITY;
    for ((g, p), f) in m.values.iter().zip(&core).zip(&phi) {
        let mag = f.norm();
        min_correction = min_correction.min(mag);
        if mag < cfg.division_guard {
            return Err(Error::DivisionGuard(format!(
                "|Phi_s + Phi_a| = {mag:.3e} at ({:.4}, {:.4})",
                p.x, p.z
            )));
        }
        let direct = hankel_green(m.k, n_cl, p.distance(&source))?;
        let image = hankel_green(m.k, n_cl, (p.x + source.x).hypot(p.z - source.z))?;
        ratios.push((g - (direct - image)) / f);
    }
    let length: f64 = samples.iter().map(|s| s.weight).sum();
    let mean: Complex64 = ratios
        .iter()
        .zip(samples)
        .map(|(r, s)| r * s.weight)
        .sum::<Complex64>()
        / length;
    let var: f64 = ratios
        .iter()
        .zip(samples)
        .map(|(r, s)| s.weight * (r - mean).norm_sqr())
        .sum::<f64>()
        / length;
    Ok(LinearizedThickness {
        h: mean.norm(),
        k: m.k,
        trig_margin,
        min_correction,
        ratio_dispersion: var.sqrt() / mean.norm(),
    })
}

/// Strategy (ii) width `delta_p = 1/2 |{k in window : E(k) < min E + beta (max E - min E)}|`
/// over the window `k_hat_p +- k_hat_1 / 2`, by midpoint integration of the
/// indicator on the scan samples. The extrema are taken over the window.
///
/// A flat `E` puts the whole window in the set and returns `k_hat_1 / 2`
/// with a warning.
pub fn step3_peak_width(scan: &ResonanceScan, beta: f64, p: usize) -> Result<f64> {
    step3_peak_width_with(scan, beta, p, Extrema::Window)
}

/// [`step3_peak_width`] with a choice of where `min E` and `max E` are taken.
pub fn step3_peak_width_with(
    scan: &ResonanceScan,
    beta: f64,
    p: usize,
    extrema: Extrema,
) -> Result<f64> {
    let b = band(scan, beta, p, extrema)?;
    let Some(thr) = b.threshold else {
        log::warn!("peak {p}: E is flat over the window; width set to half the window");
        return Ok(0.5 * (b.hi - b.lo));
    };
    let w = b.window;
    let n = w.len();
    let mut measure = 0.0;
    for i in 0..n {
        if w[i].1 < thr {
            let a = if i == 0 {
                b.lo
            } else {
                0.5 * (w[i - 1].0 + w[i].0)
            };
            let c = if i == n - 1 {
                b.hi
            } else {
                0.5 * (w[i].0 + w[i + 1].0)
            };
            measure += c - a;
        }
    }
    Ok(0.5 * measure)
}

/// For every scan sample, whether it lies in the set `B` of some located
/// peak. Peaks whose window is not covered contribute nothing.
pub fn band_membership(scan: &ResonanceScan, beta: f64, extrema: Extrema) -> Result<Vec<bool>> {
    let mut flags = vec![false; scan.samples.len()];
    for peak in &scan.peaks {
        let b = match band(scan, beta, peak.p, extrema) {
            Ok(b) => b,
            Err(Error::WindowNotCovered(_)) => continue,
            Err(e) => return Err(e),
        };
        let first = scan.samples.partition_point(|s| s.0 < b.lo);
        for (i, s) in b.window.iter().enumerate() {
            if b.threshold.is_none_or(|thr| s.1 < thr) {
                flags[first + i] = true;
            }
        }
    }
    Ok(flags)
}

struct Band<'a> {
    lo: f64,
    hi: f64,
    window: &'a [(f64, f64)],
    /// `None` when `E` is flat over the extrema range.
    threshold: Option<f64>,
}

fn band(scan: &ResonanceScan, beta: f64, p: usize, extrema: Extrema) -> Result<Band<'_>> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Config(format!("beta = {beta} outside (0, 1)")));
    }
    let k1 = scan
        .khat1()
        .ok_or_else(|| Error::NoPeak("scan has no peaks".into()))?;
    let peak = scan
        .peaks
        .iter()
        .find(|q| q.p == p)
        .ok_or_else(|| Error::NoPeak(format!("peak {p} was not located")))?;
    let lo = peak.k_hat - 0.5 * k1;
    let hi = peak.k_hat + 0.5 * k1;
    let w = scan.samples_in(lo, hi);
    let slack = scan.window_step * (1.0 + 1e-9);
    if w.len() < 3 || w[0].0 - lo > slack || hi - w[w.len() - 1].0 > slack {
        return Err(Error::WindowNotCovered(format!(
            "peak {p}: window [{lo:.5}, {hi:.5}] has {} samples{}",
            w.len(),
            if w.is_empty() {
                String::new()
            } else {
                format!(" spanning [{:.5}, {:.5}]", w[0].0, w[w.len() - 1].0)
            }
        )));
    }
    for pair in w.windows(2) {
        if pair[1].0 - pair[0].0 > slack {
            return Err(Error::WindowNotCovered(format!(
                "peak {p}: gap [{:.5}, {:.5}] exceeds the window step",
                pair[0].0, pair[1].0
            )));
        }
    }
    let pool = match extrema {
        Extrema::Window => w,
        Extrema::Sweep => &scan.samples[..],
    };
    let (emin, emax) = pool
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |a, s| {
            (a.0.min(s.1), a.1.max(s.1))
        });
    let threshold = (emax - emin > 1e-12 * emax.abs()).then_some(emin + beta * (emax - emin));
    Ok(Band {
        lo,
        hi,
        window: w,
        threshold,
    })
}

/// Slope through the origin of `delta_1` against `h`, least squares.
pub fn calibrate_c(runs: &[(f64, f64)]) -> Result<f64> {
    if runs.len() < 2 {
        return Err(Error::DegenerateDesign(format!(
            "{} run(s); need at least two",
            runs.len()
        )));
    }
    let h0 = runs[0].0;
    if runs.iter().all(|r| r.0 == h0) {
        return Err(Error::DegenerateDesign("all runs share the same h".into()));
    }
    if runs.iter().any(|r| !(r.0 > 0.0) || !r.1.is_finite()) {
        return Err(Error::DegenerateDesign(
            "h must be positive and widths finite".into(),
        ));
    }
    let sxy: f64 = runs.iter().map(|(h, d)| h * d).sum();
    let sxx: f64 = runs.iter().map(|(h, _)| h * h).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::super::Peak;
    use super::*;

    fn peak(p: usize, k: f64) -> Peak {
        Peak {
            p,
            k_coarse: k,
            k_hat: k,
            e_min: 0.0,
            derivative_norm: 0.0,
            prominent: true,
        }
    }

    fn scan_of(f: impl Fn(f64) -> f64, n: usize) -> ResonanceScan {
        let samples = (0..n)
            .map(|i| {
                let k = 0.5 + i as f64 / (n - 1) as f64;
                (k, f(k))
            })
            .collect();
        ResonanceScan::from_samples(samples, vec![peak(1, 1.0)])
    }

    #[test]
    fn flat_curve_gives_half_window() {
        let s = scan_of(|_| 2.0, 101);
        assert!((step3_peak_width(&s, 1.0 / 3.0, 1).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn v_shaped_dip_width() {
        // E = |k - 1| on [0.5, 1.5]: B = |k - 1| < beta / 2, measure = beta
        let s = scan_of(|k| (k - 1.0).abs(), 2001);
        for beta in [0.2, 1.0 / 3.0, 0.6] {
            let d = step3_peak_width(&s, beta, 1).unwrap();
            assert!((d - 0.5 * beta).abs() < 1e-3, "{beta}: {d}");
        }
    }

    #[test]
    fn width_monotone_in_beta() {
        let s = scan_of(|k| 1.0 - (-(k - 1.0).powi(2) / 0.01).exp(), 801);
        let mut prev = 0.0;
        for i in 1..20 {
            let d = step3_peak_width(&s, i as f64 / 20.0, 1).unwrap();
            assert!(d >= prev);
            prev = d;
        }
    }

    #[test]
    fn uncovered_window() {
        let samples = (0..50)
            .map(|i| (0.5 + 0.01 * i as f64, 1.0 + i as f64))
            .collect();
        let s = ResonanceScan::from_samples(samples, vec![peak(1, 1.0)]);
        assert!(matches!(
            step3_peak_width(&s, 0.3, 1),
            Err(Error::WindowNotCovered(_))
        ));
        assert!(matches!(
            step3_peak_width(&s, 0.3, 2),
            Err(Error::NoPeak(_))
        ));
    }

    #[test]
    fn membership_matches_width() {
        let s = scan_of(|k| (k - 1.0).abs(), 2001);
        let flags = band_membership(&s, 1.0 / 3.0, Extrema::Window).unwrap();
        let inside: Vec<f64> = s
            .samples
            .iter()
            .zip(&flags)
            .filter(|(_, f)| **f)
            .map(|(p, _)| p.0)
            .collect();
        assert!(inside.iter().all(|k| (k - 1.0).abs() < 1.0 / 6.0));
        assert!((inside.len() as f64 - 2000.0 / 3.0).abs() < 3.0);
    }

    #[test]
    fn calibration() {
        let c = calibrate_c(&[(0.01, 0.0012), (0.03, 0.0036)]).unwrap();
        assert!((c - 0.12).abs() < 1e-12);
        assert!(calibrate_c(&[(0.01, 0.0012)]).is_err());
        assert!(calibrate_c(&[(0.01, 0.0012), (0.01, 0.0013)]).is_err());
    }
}
