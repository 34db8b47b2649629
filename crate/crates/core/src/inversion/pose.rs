//! Step 2: source offset and tilt from non-resonant measurements.
//!
//! Away from resonance the zero-order model of the field is `2 H_a`, the
//! free-space field minus its mirror image in the core line. The direct
//! term depends on the receiver's distance to the source only, which the
//! rigid map `T` preserves; the image term carries the pose.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{nelder_mead, InversionConfig};
use crate::error::{Error, Result};
use crate::geometry::{transform, Pose, ScreenSample};
use crate::specfun::hankel_green;
use crate::synth::{FieldProbe, Measured};

/// Outcome of the pose fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseFit {
    pub pose: Pose,
    /// Frequencies actually used.
    pub frequencies: Vec<f64>,
    pub initial_guess: Pose,
    pub objective_initial: f64,
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// `sum_k ||G_meas(.; k) - 2 H_a(T(.); x0, 0; k)||^2` over fixed measurements.
pub struct PoseObjective<'a> {
    samples: &'a [ScreenSample],
    n_cl: f64,
    // per frequency: measured field minus the pose-independent direct term
    residual: Vec<(f64, Vec<Complex64>)>,
}

impl<'a> PoseObjective<'a> {
    pub fn new(samples: &'a [ScreenSample], n_cl: f64, data: &[Measured]) -> Result<Self> {
        let mut residual = Vec::with_capacity(data.len());
        for m in data {
            if m.values.len() != samples.len() {
                return Err(Error::Geometry(format!(
                    "{} values for {} screen samples",
                    m.values.len(),
                    samples.len()
                )));
            }
            let mut r = Vec::with_capacity(samples.len());
            for (g, s) in m.values.iter().zip(samples) {
                let d = s.point.x.hypot(s.point.z);
                if !(d > 0.0) {
                    return Err(Error::Geometry("screen passes through the source".into()));
                }
                r.push(g - hankel_green(m.k, n_cl, d)?);
            }
            residual.push((m.k, r));
        }
        Ok(Self {
            samples,
            n_cl,
            residual,
        })
    }

    /// Objective value; `+inf` for poses outside the admissible set.
    pub fn eval(&self, pose: &Pose) -> f64 {
        if !(pose.x0 > 0.0) || !(pose.alpha.abs() < std::f64::consts::FRAC_PI_2) {
            return f64::INFINITY;
        }
        let mut total = 0.0;
        for (k, r) in &self.residual {
            for (ri, s) in r.iter().zip(self.samples) {
                let c = transform(pose, s.point);
                let image_dist = (c.x + pose.x0).hypot(c.z);
                // G - (H_direct - H_image) = r + H_image
                let Ok(img) = hankel_green(*k, self.n_cl, image_dist) else {
                    return f64::INFINITY;
                };
                total += s.weight * (ri + img).norm_sqr();
            }
        }
        total
    }
}

/// Moves any pose frequency that falls inside a resonance band outward.
///
/// `bands` holds `(k_hat_p, delta_p)`; a frequency within `delta_p` of
/// `k_hat_p` is shifted away from it by `delta_p`.
pub fn avoid_resonances(ks: &[f64], bands: &[(f64, f64)]) -> Vec<f64> {
    ks.iter()
        .map(|&k| {
            let mut k = k;
            for &(c, w) in bands {
                if w > 0.0 && (k - c).abs() < w {
                    k += if k >= c { w } else { -w };
                }
            }
            k
        })
        .collect()
}

/// Step 2: least-squares pose at `pose_k_factors x khat1`.
///
/// The search runs in `(ln x0, alpha)` from the best point of a geometric
/// scan of `x0` at `alpha = 0`. `bands` are resonance `(k_hat_p, delta_p)`
/// pairs the pose frequencies must avoid.
pub fn step2_fit_pose(
    probe: &dyn FieldProbe,
    n_cl: f64,
    khat1: f64,
    bands: &[(f64, f64)],
    cfg: &InversionConfig,
) -> Result<PoseFit> {
    cfg.validate()?;
    if !(khat1 > 0.0) {
        return Err(Error::Config(format!("khat1 = {khat1} must be positive")));
    }
    let wanted: Vec<f64> = cfg.pose_k_factors.iter().map(|f| f * khat1).collect();
    let ks = avoid_resonances(&wanted, bands);
    let data = probe.measure_many(&ks)?;
    let objective = PoseObjective::new(probe.samples(), n_cl, &data)?;

    let ratio = (cfg.x0_scan_max / cfg.x0_scan_min).powf(1.0 / (cfg.x0_scan_points - 1) as f64);
    let (x0_init, _) = (0..cfg.x0_scan_points)
        .map(|i| cfg.x0_scan_min * ratio.powi(i as i32))
        .map(|x0| (x0, objective.eval(&Pose { x0, alpha: 0.0 })))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty scan");
    let initial_guess = Pose {
        x0: x0_init,
        alpha: 0.0,
    };
    let objective_initial = objective.eval(&initial_guess);

    let nm = nelder_mead(
        |u| {
            objective.eval(&Pose {
                x0: u[0].exp(),
                alpha: u[1],
            })
        },
        &[x0_init.ln(), 0.0],
        &cfg.nelder_mead,
    );
    let pose = Pose::new(nm.x[0].exp(), nm.x[1])?;
    Ok(PoseFit {
        pose,
        frequencies: data.iter().map(|m| m.k).collect(),
        initial_guess,
        objective_initial,
        objective: nm.f,
        iterations: nm.iterations,
        evaluations: nm.evaluations,
        converged: nm.converged,
    })
}
