//! Step 1: locating the resonances in `E(k) = ||G_meas(.; k) - H(.; k)||_{L2(S)}`.
//!
//! `E` only needs the free-space function with the source at the
//! measurement-frame origin, so this step is independent of the pose.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{linspace, Extrema, InversionConfig};
use crate::error::{Error, Result};
use crate::geometry::{screen_norm, ScreenSample};
use crate::specfun::hankel_green;
use crate::synth::{FieldProbe, Measured};

/// One located resonance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Harmonic index, starting at 1.
    pub p: usize,
    /// Coarse estimate: midpoint of the interval with the largest derivative norm.
    pub k_coarse: f64,
    /// `argmin E` over the refined window.
    pub k_hat: f64,
    pub e_min: f64,
    /// Derivative norm at the coarse estimate.
    pub derivative_norm: f64,
    /// Whether the coarse maximum exceeded the prominence threshold.
    pub prominent: bool,
}

/// Everything step 1 measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceScan {
    pub coarse_k: Vec<f64>,
    pub coarse_e: Vec<f64>,
    /// `||G(k_{i+1}) - G(k_i)||`, one entry per coarse interval.
    pub derivative_norms: Vec<f64>,
    pub median_derivative: f64,
    pub threshold: f64,
    pub peaks: Vec<Peak>,
    /// Largest sample spacing accepted inside a peak-width window.
    pub window_step: f64,
    /// Every `(k, E(k))` evaluated, sorted by `k`.
    pub samples: Vec<(f64, f64)>,
}

impl ResonanceScan {
    pub fn khat1(&self) -> Option<f64> {
        self.peaks.first().map(|p| p.k_hat)
    }

    /// A scan holding only the given `E` samples and peaks; used to evaluate
    /// peak widths on externally produced curves.
    pub fn from_samples(mut samples: Vec<(f64, f64)>, peaks: Vec<Peak>) -> Self {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        samples.dedup_by(|a, b| a.0 == b.0);
        let window_step = samples
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .fold(0.0, f64::max);
        Self {
            coarse_k: Vec::new(),
            coarse_e: Vec::new(),
            derivative_norms: Vec::new(),
            median_derivative: 0.0,
            threshold: 0.0,
            peaks,
            window_step,
            samples,
        }
    }

    pub fn samples_in(&self, lo: f64, hi: f64) -> &[(f64, f64)] {
        let a = self.samples.partition_point(|s| s.0 < lo);
        let b = self.samples.partition_point(|s| s.0 <= hi);
        &self.samples[a..b]
    }
}

/// Evaluates `E(k)` on measured fields.
pub(crate) struct ResidualNorm<'a> {
    samples: &'a [ScreenSample],
    radii: Vec<f64>,
    n_cl: f64,
}

impl<'a> ResidualNorm<'a> {
    pub(crate) fn new(samples: &'a [ScreenSample], n_cl: f64) -> Result<Self> {
        let radii: Vec<f64> = samples.iter().map(|s| s.point.x.hypot(s.point.z)).collect();
        if radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::Geometry("screen passes through the source".into()));
        }
        Ok(Self {
            samples,
            radii,
            n_cl,
        })
    }

    pub(crate) fn eval(&self, m: &Measured) -> Result<f64> {
        let mut diff = Vec::with_capacity(self.radii.len());
        for (g, &r) in m.values.iter().zip(&self.radii) {
            diff.push(g - hankel_green(m.k, self.n_cl, r)?);
        }
        screen_norm(&diff, self.samples)
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

struct Sampler<'a> {
    probe: &'a dyn FieldProbe,
    norm: ResidualNorm<'a>,
    // keyed by bit pattern; positive floats sort like their values
    seen: BTreeMap<u64, f64>,
}

impl Sampler<'_> {
    fn eval_grid(&mut self, ks: &[f64]) -> Result<Vec<(f64, f64)>> {
        let grid = self.probe.resolve_grid(ks)?;
        let todo: Vec<f64> = grid
            .iter()
            .copied()
            .filter(|k| !self.seen.contains_key(&k.to_bits()))
            .collect();
        for m in self.probe.measure_many(&todo)? {
            let e = self.norm.eval(&m)?;
            self.seen.insert(m.k.to_bits(), e);
        }
        Ok(grid
            .iter()
            .filter_map(|k| self.seen.get(&k.to_bits()).map(|&e| (*k, e)))
            .collect())
    }

    /// `None` when the probe has no frequency near `k`.
    fn eval_one(&mut self, k: f64) -> Result<Option<(f64, f64)>> {
        Ok(self.eval_grid(&[k])?.into_iter().next())
    }
}

/// Bisects the crossing of `threshold` between `inside` (below) and `outside`.
fn zoom_crossing(
    sampler: &mut Sampler<'_>,
    mut inside: f64,
    mut outside: f64,
    threshold: f64,
    steps: usize,
) -> Result<()> {
    for _ in 0..steps {
        let mid = 0.5 * (inside + outside);
        let Some((k, e)) = sampler.eval_one(mid)? else {
            break;
        };
        if k == inside || k == outside {
            break;
        }
        if e < threshold {
            inside = k;
        } else {
            outside = k;
        }
    }
    Ok(())
}

/// Step 1 on any field source.
///
/// Coarse pass: `E` and the derivative norms on `coarse_steps + 1` points;
/// the first local maximum of the derivative norm above `prominence x median`
/// seeds the first resonance. Refined pass: `argmin E` on a grid of step
/// `dk / refine_factor` over `k_coarse (1 +- refine_halfwidth)`. Harmonic `p`
/// is seeded by the largest derivative norm near `p khat1` and refined the
/// same way. Each peak's width window `khat_p +- khat1 / 2` is then sampled
/// uniformly, and the two crossings of the `beta` threshold are bisected.
/// Windows may reach past `k_max`; a finite dataset simply leaves them
/// uncovered.
pub fn step1_scan(
    probe: &dyn FieldProbe,
    n_cl: f64,
    cfg: &InversionConfig,
) -> Result<ResonanceScan> {
    cfg.validate()?;
    let mut sampler = Sampler {
        probe,
        norm: ResidualNorm::new(probe.samples(), n_cl)?,
        seen: BTreeMap::new(),
    };
    let dk = cfg.coarse_step();
    let desired = linspace(cfg.k_min, cfg.k_max, cfg.coarse_steps + 1);
    let grid = probe.resolve_grid(&desired)?;
    if grid.len() < 3 {
        return Err(Error::NoPeak(format!(
            "only {} frequencies available in [{}, {}]",
            grid.len(),
            cfg.k_min,
            cfg.k_max
        )));
    }
    let measured = probe.measure_many(&grid)?;
    let mut coarse_e = Vec::with_capacity(grid.len());
    for m in &measured {
        let e = sampler.norm.eval(m)?;
        sampler.seen.insert(m.k.to_bits(), e);
        coarse_e.push(e);
    }
    let coarse_k: Vec<f64> = measured.iter().map(|m| m.k).collect();
    let mut deriv = Vec::with_capacity(measured.len() - 1);
    for w in measured.windows(2) {
        let d: Vec<Complex64> = w[1]
            .values
            .iter()
            .zip(w[0].values.iter())
            .map(|(a, b)| a - b)
            .collect();
        deriv.push(screen_norm(&d, probe.samples())?);
    }
    drop(measured);
    let med = median(&deriv);
    let threshold = cfg.prominence * med;
    let mid = |i: usize| 0.5 * (coarse_k[i] + coarse_k[i + 1]);

    let first = (1..deriv.len().saturating_sub(1))
        .find(|&i| deriv[i] > threshold && deriv[i] > deriv[i - 1] && deriv[i] >= deriv[i + 1])
        .ok_or_else(|| {
            Error::NoPeak(format!(
                "no derivative-norm maximum above {threshold:.3e} (median {med:.3e}) in [{}, {}]",
                coarse_k[0],
                coarse_k[coarse_k.len() - 1]
            ))
        })?;

    let refine = |sampler: &mut Sampler<'_>, center: f64, half: f64| -> Result<(f64, f64)> {
        let step = dk / cfg.refine_factor as f64;
        let n = ((2.0 * half) / step).floor() as usize;
        let ks: Vec<f64> = (0..=n).map(|j| center - half + step * j as f64).collect();
        let vals = sampler.eval_grid(&ks)?;
        vals.into_iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::NoPeak(format!("no frequencies available near {center}")))
    };

    let kc1 = mid(first);
    let (k1, e1) = refine(&mut sampler, kc1, cfg.refine_halfwidth * kc1)?;
    let mut peaks = vec![Peak {
        p: 1,
        k_coarse: kc1,
        k_hat: k1,
        e_min: e1,
        derivative_norm: deriv[first],
        prominent: true,
    }];
    for p in 2..=cfg.max_peaks {
        let predicted = p as f64 * k1;
        let half = cfg.refine_halfwidth * k1;
        if predicted + half > cfg.k_max {
            break;
        }
        let best = (0..deriv.len())
            .filter(|&i| (mid(i) - predicted).abs() <= cfg.harmonic_search * k1)
            .max_by(|&a, &b| deriv[a].total_cmp(&deriv[b]));
        let (seed, dn) = match best {
            Some(i) => (mid(i), deriv[i]),
            None => (predicted, 0.0),
        };
        let (kp, ep) = refine(&mut sampler, seed, half)?;
        peaks.push(Peak {
            p,
            k_coarse: seed,
            k_hat: kp,
            e_min: ep,
            derivative_norm: dn,
            prominent: dn > threshold,
        });
    }

    let mut windows = Vec::new();
    for peak in &peaks {
        let lo = peak.k_hat - 0.5 * k1;
        let hi = peak.k_hat + 0.5 * k1;
        if lo > 0.0 {
            sampler.eval_grid(&linspace(lo, hi, cfg.window_points))?;
            windows.push((peak.k_hat, lo, hi));
        }
    }
    let extrema = |it: &mut dyn Iterator<Item = f64>| {
        it.fold((f64::INFINITY, f64::NEG_INFINITY), |acc, e| {
            (acc.0.min(e), acc.1.max(e))
        })
    };
    let sweep = extrema(&mut sampler.seen.values().copied());
    for (k_hat, lo, hi) in windows {
        let window: Vec<(f64, f64)> = sampler
            .seen
            .range(lo.to_bits()..=hi.to_bits())
            .map(|(&b, &e)| (f64::from_bits(b), e))
            .collect();
        if window.len() < 3 {
            continue;
        }
        let (emin, emax) = match cfg.width_extrema {
            Extrema::Window => extrema(&mut window.iter().map(|s| s.1)),
            Extrema::Sweep => sweep,
        };
        let thr = emin + cfg.beta * (emax - emin);
        let centre = window
            .partition_point(|s| s.0 < k_hat)
            .min(window.len() - 1);
        if window[centre].1 >= thr {
            continue;
        }
        if let Some(j) = (0..centre).rev().find(|&j| window[j].1 >= thr) {
            zoom_crossing(
                &mut sampler,
                window[j + 1].0,
                window[j].0,
                thr,
                cfg.zoom_bisections,
            )?;
        }
        if let Some(j) = (centre + 1..window.len()).find(|&j| window[j].1 >= thr) {
            zoom_crossing(
                &mut sampler,
                window[j - 1].0,
                window[j].0,
                thr,
                cfg.zoom_bisections,
            )?;
        }
    }

    let samples = sampler
        .seen
        .iter()
        .map(|(&b, &e)| (f64::from_bits(b), e))
        .collect();
    let window_step = k1 / (cfg.window_points - 1) as f64;
    Ok(ResonanceScan {
        coarse_k,
        coarse_e,
        derivative_norms: deriv,
        median_derivative: med,
        threshold,
        peaks,
        window_step,
        samples,
    })
}
