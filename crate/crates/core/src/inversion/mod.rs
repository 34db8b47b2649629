//! Three-step identification of the core from screen measurements.
//!
//! 1. [`scan::step1_scan`]: resonance search on `E(k) = ||G_meas - H||`,
//!    giving `khat1` and `nbar = pi / (2 khat1)`.
//! 2. [`pose::step2_fit_pose`]: source offset and tilt from a least-squares
//!    fit of `2 H_a` at non-resonant frequencies.
//! 3. [`thickness`]: `h` from the first-order correction (strategy i) and
//!    from resonance-peak widths (strategy ii).
//!
//! [`pipeline::run_pipeline`] chains the steps and assembles the report.

pub mod nelder_mead;
pub mod pipeline;
pub mod pose;
pub mod scan;
pub mod thickness;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveguide::QuadratureOptions;

pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use pipeline::{run_pipeline, InversionReport};
pub use pose::{step2_fit_pose, PoseFit};
pub use scan::{step1_scan, Peak, ResonanceScan};
pub use thickness::{
    band_membership, calibrate_c, step3_h_linearized, step3_peak_width, step3_peak_width_with,
    Extrema, LinearizedThickness,
};

/// Peak-width constant `C` in `delta_1 = C h` for the reference screen and `beta = 1/3`.
pub const DEFAULT_PEAK_CONSTANT: f64 = 0.11824;

/// Tunables of the identification pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InversionConfig {
    pub k_min: f64,
    pub k_max: f64,
    /// Number of coarse intervals; `dk = (k_max - k_min) / coarse_steps`.
    pub coarse_steps: usize,
    /// Refined step is `dk / refine_factor`.
    pub refine_factor: usize,
    /// Half-width of the refinement window, relative to the first coarse peak.
    pub refine_halfwidth: f64,
    /// Peak threshold as a multiple of the median derivative norm.
    pub prominence: f64,
    /// Resonances to locate (first one plus its harmonics).
    pub max_peaks: usize,
    /// Harmonic `p` is searched among coarse maxima within `p khat1 +- harmonic_search * khat1`.
    pub harmonic_search: f64,
    /// Uniform samples across each peak-width window `khat_p +- khat1 / 2`.
    pub window_points: usize,
    pub beta: f64,
    pub width_extrema: Extrema,
    /// Bisection steps refining each crossing of the `beta` threshold.
    pub zoom_bisections: usize,
    pub pose_k_factors: Vec<f64>,
    pub x0_scan_min: f64,
    pub x0_scan_max: f64,
    pub x0_scan_points: usize,
    pub nelder_mead: NelderMeadOptions,
    pub linearized_factor: f64,
    /// Minimum `|sin(k nbar)|` and `|cos(k nbar)|` at the strategy-(i) frequency.
    pub resonance_guard: f64,
    /// Minimum `|Phi_s + Phi_a|` at any screen sample.
    pub division_guard: f64,
    pub peak_constant: f64,
    /// Prior value of `nbar`; a step-1 estimate off by more than
    /// `hint_tolerance` (relative) is flagged in the report.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar_hint: Option<f64>,
    pub hint_tolerance: f64,
    pub quadrature: QuadratureOptions,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            k_min: 0.25,
            k_max: 4.5,
            coarse_steps: 400,
            refine_factor: 50,
            refine_halfwidth: 0.03,
            prominence: 5.0,
            max_peaks: 4,
            harmonic_search: 0.1,
            window_points: 400,
            beta: 1.0 / 3.0,
            width_extrema: Extrema::Window,
            zoom_bisections: 12,
            pose_k_factors: vec![2.5, 3.5, 4.5],
            x0_scan_min: 0.05,
            x0_scan_max: 5.0,
            x0_scan_points: 100,
            nelder_mead: NelderMeadOptions::default(),
            linearized_factor: 2.99,
            resonance_guard: 0.01,
            division_guard: 1e-8,
            peak_constant: DEFAULT_PEAK_CONSTANT,
            nbar_hint: None,
            hint_tolerance: 0.1,
            quadrature: QuadratureOptions::default(),
        }
    }
}

impl InversionConfig {
    pub fn coarse_step(&self) -> f64 {
        (self.k_max - self.k_min) / self.coarse_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.k_min > 0.0 && self.k_max > self.k_min) {
            return bad("need 0 < k_min < k_max");
        }
        if self.coarse_steps < 4 || self.refine_factor < 1 || self.window_points < 3 {
            return bad("grid sizes too small");
        }
        if !(self.refine_halfwidth > 0.0)
            || !(self.prominence > 0.0)
            || !(self.harmonic_search > 0.0)
        {
            return bad("refine_halfwidth, prominence and harmonic_search must be positive");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        if self.pose_k_factors.is_empty() || self.pose_k_factors.iter().any(|f| !(*f > 0.0)) {
            return bad("pose_k_factors must be positive and non-empty");
        }
        if !(self.x0_scan_min > 0.0 && self.x0_scan_max > self.x0_scan_min)
            || self.x0_scan_points < 2
        {
            return bad("invalid x0 scan range");
        }
        if !(self.peak_constant > 0.0) || !(self.linearized_factor > 0.0) {
            return bad("peak_constant and linearized_factor must be positive");
        }
        if self.nbar_hint.is_some_and(|n| !(n > 0.0)) || !(self.hint_tolerance > 0.0) {
            return bad("nbar_hint and hint_tolerance must be positive");
        }
        if self.max_peaks == 0 {
            return bad("max_peaks must be at least 1");
        }
        Ok(())
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect()
}
