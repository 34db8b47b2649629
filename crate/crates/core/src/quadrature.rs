//! Adaptive integration against the spectral kernel
//! `e^{ik sqrt(n_cl^2 - tau^2) |z - z0|} / (i sqrt(n_cl^2 - tau^2))` on `tau in [0, inf)`.
//!
//! The propagating band `[0, n_cl]` is mapped by `tau = n_cl sin(theta)` and the
//! evanescent band `(n_cl, inf)` by `tau = n_cl cosh(s)`. Both substitutions
//! cancel the inverse square root exactly, so the integrand handed to the
//! Gauss-Kronrod rule is bounded and the branch point is never sampled.
//! Panels are graded geometrically (first width `tau_refine_step`) towards
//! `tau = 0` and `tau = n_cl`, then bisected adaptively.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default absolute tolerance per component.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Default bisection depth cap.
pub const DEFAULT_MAX_DEPTH: u32 = 40;
/// Extra decay (in e-folds) beyond `-ln(tolerance)` before the tail is cut.
pub const TAIL_MARGIN: f64 = 5.0;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Parameters of one spectral integral.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralIntegrandContext {
    /// Frequency.
    pub k: f64,
    /// Cladding index; location of the branch point.
    pub n_cl: f64,
    /// `|z - z0|`; sets the evanescent decay rate of the kernel.
    pub z_dist: f64,
    /// Absolute tolerance per component.
    pub tolerance: f64,
    /// First panel width next to `tau = 0` and `tau = n_cl`.
    pub tau_refine_step: f64,
    pub max_depth: u32,
    /// Explicit upper limit; overrides the decay-based truncation.
    pub tau_max: Option<f64>,
    /// Additional panel boundaries (in `tau`) supplied by the caller.
    pub breakpoints: Vec<f64>,
}

impl SpectralIntegrandContext {
    pub fn new(k: f64, n_cl: f64, z_dist: f64) -> Self {
        Self {
            k,
            n_cl,
            z_dist,
            tolerance: DEFAULT_TOLERANCE,
            tau_refine_step: n_cl / 1000.0,
            max_depth: DEFAULT_MAX_DEPTH,
            tau_max: None,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_refine_step(mut self, step: f64) -> Self {
        self.tau_refine_step = step;
        self
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |d: String| Err(Error::domain("integrate_spectral", d));
        if !(self.k > 0.0) || !self.k.is_finite() {
            return bad(format!("k = {}", self.k));
        }
        if !(self.n_cl > 0.0) || !self.n_cl.is_finite() {
            return bad(format!("n_cl = {}", self.n_cl));
        }
        if !(self.tolerance > 0.0) {
            return bad(format!("tolerance = {}", self.tolerance));
        }
        if !(self.tau_refine_step > 0.0) {
            return bad(format!("tau_refine_step = {}", self.tau_refine_step));
        }
        if !(self.z_dist >= 0.0) {
            return bad(format!("z_dist = {}", self.z_dist));
        }
        match self.tau_max {
            Some(t) if !(t > self.n_cl) => bad(format!("tau_max = {t} must exceed n_cl")),
            None if self.z_dist == 0.0 => {
                bad("z_dist = 0 needs an explicit tau_max (no kernel decay)".into())
            }
            _ => Ok(()),
        }
    }

    /// Upper limit of the evanescent band in the `s` variable.
    fn s_max(&self) -> f64 {
        match self.tau_max {
            Some(t) => (t / self.n_cl).acosh(),
            None => {
                let target = -self.tolerance.ln() + TAIL_MARGIN;
                (target.max(1.0) / (self.k * self.n_cl * self.z_dist)).asinh()
            }
        }
    }
}

/// `sqrt(n_cl^2 - tau^2)` on the outgoing branch: non-negative real below the
/// branch point, positive imaginary above it.
pub fn sqrt_branch(n_cl: f64, tau: f64) -> Complex64 {
    let d = (n_cl - tau) * (n_cl + tau);
    if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

/// A quadrature sample in the substituted variables.
#[derive(Debug, Clone, Copy)]
pub struct SpectralNode {
    pub tau: f64,
    /// `sqrt_branch(n_cl, tau)`.
    pub root: Complex64,
    /// `(d tau / d var) / (i root)`; finite on both bands.
    pub measure: Complex64,
}

impl SpectralNode {
    /// Kernel times Jacobian: `e^{ik root z} (d tau/d var) / (i root)`.
    #[inline]
    pub fn kernel(&self, k: f64, z: f64) -> Complex64 {
        let phase = Complex64::new(0.0, k * z) * self.root;
        phase.exp() * self.measure
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Band {
    Propagating,
    Evanescent,
}

fn node_at(band: Band, n_cl: f64, var: f64) -> SpectralNode {
    match band {
        Band::Propagating => {
            let (s, c) = var.sin_cos();
            SpectralNode {
                tau: n_cl * s,
                root: Complex64::new(n_cl * c, 0.0),
                measure: Complex64::new(0.0, -1.0),
            }
        }
        Band::Evanescent => SpectralNode {
            tau: n_cl * var.cosh(),
            root: Complex64::new(0.0, n_cl * var.sinh()),
            measure: Complex64::new(-1.0, 0.0),
        },
    }
}

/// Outcome of a vector-valued spectral integral.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub values: Vec<Complex64>,
    /// Sum of accepted local error estimates (max over components).
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Adaptive<'a, F> {
    f: F,
    dim: usize,
    n_cl: f64,
    max_depth: u32,
    scratch: Vec<Complex64>,
    acc: &'a mut [Complex64],
    err: f64,
    evals: usize,
}

impl<F: FnMut(&SpectralNode, &mut [Complex64])> Adaptive<'_, F> {
    fn panel(&mut self, band: Band, a: f64, b: f64, tol: f64, depth: u32) -> Result<()> {
        let dim = self.dim;
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        // scratch layout: 15 rows of `dim`; row 0 centre, rows 2j-1/2j at -/+ XGK[j]
        for row in 0..15 {
            let x = if row == 0 {
                center
            } else {
                let j = (row - 1) / 2;
                let sign = if row % 2 == 1 { -1.0 } else { 1.0 };
                center + sign * half * XGK[j]
            };
            let node = node_at(band, self.n_cl, x);
            (self.f)(&node, &mut self.scratch[row * dim..(row + 1) * dim]);
        }
        self.evals += 15;

        let mut worst = 0.0f64;
        let mut kron_all = Vec::with_capacity(dim);
        for c in 0..dim {
            let fc = self.scratch[c];
            let mut kron = fc * WGK[7];
            let mut gauss = fc * WG[3];
            let mut abs_sum = fc.norm() * WGK[7];
            for j in 0..7 {
                let f1 = self.scratch[(2 * j + 1) * dim + c];
                let f2 = self.scratch[(2 * j + 2) * dim + c];
                let pair = f1 + f2;
                kron += pair * WGK[j];
                abs_sum += (f1.norm() + f2.norm()) * WGK[j];
                if j % 2 == 1 {
                    gauss += pair * WG[j / 2];
                }
            }
            let mean = kron * 0.5;
            let mut asc = (fc - mean).norm() * WGK[7];
            for (j, w) in WGK[..7].iter().enumerate() {
                let f1 = self.scratch[(2 * j + 1) * dim + c];
                let f2 = self.scratch[(2 * j + 2) * dim + c];
                asc += ((f1 - mean).norm() + (f2 - mean).norm()) * w;
            }
            let raw = ((kron - gauss) * half).norm();
            let resasc = asc * half;
            let resabs = abs_sum * half;
            let mut est = raw;
            if resasc > 0.0 && raw > 0.0 {
                est = resasc * (200.0 * raw / resasc).powf(1.5).min(1.0);
            }
            if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
                est = est.max(50.0 * f64::EPSILON * resabs);
            }
            worst = worst.max(est);
            kron_all.push(kron * half);
        }
        if !worst.is_finite()
            || kron_all
                .iter()
                .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::NonConvergence(format!(
                "non-finite integrand on [{a}, {b}] ({band:?})"
            )));
        }
        let roundoff_floor =
            100.0 * f64::EPSILON * kron_all.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if worst <= tol.max(roundoff_floor) {
            for (acc, v) in self.acc.iter_mut().zip(kron_all) {
                *acc += v;
            }
            self.err += worst;
            return Ok(());
        }
        if depth >= self.max_depth {
            return Err(Error::NonConvergence(format!(
                "depth cap {} reached on [{a:.3e}, {b:.3e}] ({band:?}), local error {worst:.3e} > {tol:.3e}",
                self.max_depth
            )));
        }
        self.panel(band, a, center, 0.5 * tol, depth + 1)?;
        self.panel(band, center, b, 0.5 * tol, depth + 1)
    }
}

fn initial_panels(ctx: &SpectralIntegrandContext, s_max: f64) -> (Vec<f64>, Vec<f64>) {
    let n = ctx.n_cl;
    let step = ctx.tau_refine_step.min(0.25 * n);
    let mut taus_low = vec![0.0, 0.5 * n, n];
    let mut t = step;
    while t < 0.5 * n {
        taus_low.push(t);
        taus_low.push(n - t);
        t *= 2.0;
    }
    let tau_top = n * s_max.cosh();
    let mut taus_high = vec![n];
    let mut t = step;
    while t < n {
        taus_high.push(n + t);
        t *= 2.0;
    }
    for &b in &ctx.breakpoints {
        if b > 0.0 && b < n {
            taus_low.push(b);
        } else if b > n {
            taus_high.push(b);
        }
    }
    let mut theta: Vec<f64> = taus_low
        .iter()
        .map(|&t| (t / n).clamp(0.0, 1.0).asin())
        .collect();
    theta.push(FRAC_PI_2);
    let mut s: Vec<f64> = taus_high
        .iter()
        .filter(|&&t| t < tau_top)
        .map(|&t| (t / n).max(1.0).acosh())
        .collect();
    // uniform panels of width <= 0.5 in s out to the tail cut
    let s_start = (2.0f64).acosh().min(s_max);
    let count = ((s_max - s_start) / 0.5).ceil().max(0.0) as usize;
    for i in 1..=count {
        s.push(s_start + (s_max - s_start) * i as f64 / count as f64);
    }
    s.push(s_max);
    (sorted_unique(theta), sorted_unique(s))
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1e-300));
    v
}

/// Integrates a vector-valued integrand over `tau in [0, inf)`.
///
/// `f(node, out)` must write the full integrand (including the kernel, via
/// [`SpectralNode::kernel`]) for all `dim` components. All components share
/// one adaptive mesh; the error criterion is the worst component.
pub fn integrate_spectral_batch<F>(
    dim: usize,
    f: F,
    ctx: &SpectralIntegrandContext,
) -> Result<SpectralResult>
where
    F: FnMut(&SpectralNode, &mut [Complex64]),
{
    ctx.validate()?;
    let mut values = vec![Complex64::new(0.0, 0.0); dim];
    if dim == 0 {
        return Ok(SpectralResult {
            values,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let s_max = ctx.s_max();
    let (theta, s) = initial_panels(ctx, s_max);
    let width_low = FRAC_PI_2;
    let width_high = s_max.max(f64::MIN_POSITIVE);
    let tol_side = 0.5 * ctx.tolerance;

    let mut engine = Adaptive {
        f,
        dim,
        n_cl: ctx.n_cl,
        max_depth: ctx.max_depth,
        scratch: vec![Complex64::new(0.0, 0.0); 15 * dim],
        acc: &mut values,
        err: 0.0,
        evals: 0,
    };
    for w in theta.windows(2) {
        if w[1] > w[0] {
            let tol = tol_side * (w[1] - w[0]) / width_low;
            engine.panel(Band::Propagating, w[0], w[1], tol, 0)?;
        }
    }
    for w in s.windows(2) {
        if w[1] > w[0] {
            let tol = tol_side * (w[1] - w[0]) / width_high;
            engine.panel(Band::Evanescent, w[0], w[1], tol, 0)?;
        }
    }
    let error_estimate = engine.err;
    let evaluations = engine.evals;
    Ok(SpectralResult {
        values,
        error_estimate,
        evaluations,
    })
}

/// `int_0^inf regular(tau) e^{ik sqrt(n^2 - tau^2) z} / (i sqrt(n^2 - tau^2)) dtau`
/// with `z = ctx.z_dist`.
pub fn integrate_spectral<F>(regular: F, ctx: &SpectralIntegrandContext) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let (k, z) = (ctx.k, ctx.z_dist);
    let res = integrate_spectral_batch(
        1,
        |node, out| out[0] = regular(node.tau) * node.kernel(k, z),
        ctx,
    )?;
    Ok(res.values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::hankel_green;
    use std::cell::Cell;
    use std::f64::consts::PI;

    #[test]
    fn branch_values() {
        assert_eq!(sqrt_branch(1.0, 0.0), Complex64::new(1.0, 0.0));
        assert_eq!(sqrt_branch(1.0, 1.0), Complex64::new(0.0, 0.0));
        let r = sqrt_branch(1.0, 2f64.sqrt());
        assert!((r - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        // decaying kernel above the branch point
        let node = SpectralNode {
            tau: 2.0,
            root: sqrt_branch(1.0, 2.0),
            measure: Complex64::new(1.0, 0.0),
        };
        assert!(node.kernel(1.0, 3.0).norm() < 1.0);
    }

    #[test]
    fn zero_integrand() {
        let ctx = SpectralIntegrandContext::new(1.0, 1.0, 3.0);
        let v = integrate_spectral(|_| Complex64::new(0.0, 0.0), &ctx).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn reproduces_hankel_on_axis() {
        // (1/2pi) int kernel dtau with x = x0 is the free-space Green value at r = z
        for &(k, n, z) in &[(1.0, 1.0, 3.0), (2.5, 1.0, 0.7), (0.6, 1.4, 5.0)] {
            let ctx = SpectralIntegrandContext::new(k, n, z);
            let v = integrate_spectral(|_| Complex64::new(1.0 / (2.0 * PI), 0.0), &ctx).unwrap();
            let h = hankel_green(k, n, z).unwrap();
            assert!((v - h).norm() < 1e-6, "k={k} z={z}: {v} vs {h}");
        }
    }

    #[test]
    fn never_samples_branch_point_or_origin() {
        let ctx = SpectralIntegrandContext::new(1.0, 1.0, 2.0);
        let hits = Cell::new(0usize);
        integrate_spectral_batch(
            1,
            |node, out| {
                if node.tau == 1.0 || node.tau == 0.0 {
                    hits.set(hits.get() + 1);
                }
                out[0] = node.kernel(1.0, 2.0);
            },
            &ctx,
        )
        .unwrap();
        assert_eq!(hits.get(), 0);
    }

    #[test]
    fn tolerance_consistency() {
        let g = |t: f64| Complex64::new((3.0 * t).cos() * t, 0.0);
        let base = SpectralIntegrandContext::new(1.3, 1.0, 1.5);
        let tol = 1e-6;
        let a = integrate_spectral(g, &base.clone().with_tolerance(tol)).unwrap();
        let b = integrate_spectral(g, &base.clone().with_tolerance(tol / 2.0)).unwrap();
        assert!((a - b).norm() <= tol);
        let loose = integrate_spectral_batch(
            1,
            |n, o| o[0] = g(n.tau) * n.kernel(1.3, 1.5),
            &base.clone().with_tolerance(2.0 * tol),
        )
        .unwrap();
        assert!(loose.error_estimate <= 2.0 * tol);
    }

    #[test]
    fn halving_refine_step_is_within_tolerance() {
        let g = |t: f64| Complex64::new((2.0 * t).cos(), 0.0);
        let ctx = SpectralIntegrandContext::new(2.0, 1.0, 2.5);
        let a = integrate_spectral(g, &ctx).unwrap();
        let step = ctx.tau_refine_step;
        let b = integrate_spectral(g, &ctx.clone().with_refine_step(step / 2.0)).unwrap();
        assert!((a - b).norm() < ctx.tolerance);
    }

    #[test]
    fn depth_cap_reports_non_convergence() {
        let mut ctx = SpectralIntegrandContext::new(1.0, 1.0, 2.0).with_tolerance(1e-12);
        ctx.max_depth = 1;
        let r = integrate_spectral(|t| Complex64::new((40.0 * t).sin(), 0.0), &ctx);
        assert!(matches!(r, Err(Error::NonConvergence(_))));
    }

    #[test]
    fn zero_distance_requires_explicit_cut() {
        let ctx = SpectralIntegrandContext::new(1.0, 1.0, 0.0);
        assert!(integrate_spectral(|_| Complex64::new(1.0, 0.0), &ctx).is_err());
    }

    #[test]
    fn deterministic() {
        let g = |t: f64| Complex64::new((5.0 * t).sin(), t);
        let ctx = SpectralIntegrandContext::new(1.7, 1.2, 0.9);
        let a = integrate_spectral(g, &ctx).unwrap();
        let b = integrate_spectral(g, &ctx).unwrap();
        assert_eq!(a, b);
    }
}
