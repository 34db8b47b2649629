//! Exact Green function of the thin-core open waveguide.
//!
//! `G = G_{s,g} + G_{a,g} + G_{s,c} + G_{a,c}`: a finite sum over guided
//! modes plus two continuous-spectrum integrals. The continuous parts are
//! evaluated in the variable `k^2 tau^2 = lambda - d^2`, which puts the lower
//! endpoint at `tau = 0` and the cladding branch point at `tau = n_cl`, so the
//! same quadrature engine serves `G`, `H` and the correction fields.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_spectral_batch, SpectralIntegrandContext, SpectralNode};
use crate::Point;

/// Physical description of the slab: half-thickness `h`, scaled core index
/// `nbar = n_h h` and cladding index `n_cl`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveguideParams {
    pub h: f64,
    pub nbar: f64,
    pub n_cl: f64,
}

impl WaveguideParams {
    /// Validated constructor; requires a high-contrast core `n_h > n_cl`.
    pub fn new(h: f64, nbar: f64, n_cl: f64) -> Result<Self> {
        let p = Self { h, nbar, n_cl };
        p.validate()?;
        Ok(p)
    }

    /// Degenerate core with `n_h = n_cl`; `G` reduces to the free-space Green function.
    pub fn index_matched(h: f64, n_cl: f64) -> Result<Self> {
        if !(h > 0.0 && n_cl > 0.0) {
            return Err(Error::domain(
                "WaveguideParams",
                format!("h = {h}, n_cl = {n_cl}"),
            ));
        }
        Ok(Self {
            h,
            nbar: h * n_cl,
            n_cl,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.h.is_finite() && self.nbar.is_finite() && self.n_cl.is_finite();
        if !finite || !(self.h > 0.0) || !(self.nbar > 0.0) || !(self.n_cl > 0.0) {
            return Err(Error::domain("WaveguideParams", format!("{self:?}")));
        }
        if !(self.n_h() > self.n_cl) {
            return Err(Error::domain(
                "WaveguideParams",
                format!(
                    "core index n_h = {} must exceed n_cl = {}",
                    self.n_h(),
                    self.n_cl
                ),
            ));
        }
        Ok(())
    }

    pub fn n_h(&self) -> f64 {
        self.nbar / self.h
    }

    /// `d^2 = k^2 (n_h^2 - n_cl^2)`.
    pub fn d2(&self, k: f64) -> f64 {
        let nh = self.n_h();
        k * k * (nh - self.n_cl) * (nh + self.n_cl)
    }

    /// `L = h d = sqrt(k^2 nbar^2 - h^2 k^2 n_cl^2)`, the guided-root level in the `y` variable.
    pub fn guided_level(&self, k: f64) -> f64 {
        let hn = self.h * self.n_cl;
        let v = (self.nbar - hn) * (self.nbar + hn);
        k * v.max(0.0).sqrt()
    }

    fn cache_key(&self, k: f64) -> [u64; 4] {
        [
            self.h.to_bits(),
            self.nbar.to_bits(),
            self.n_cl.to_bits(),
            k.to_bits(),
        ]
    }
}

/// Mode parity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

// sin(q s)/q, continuous at q = 0
#[inline]
fn sin_over(q: f64, s: f64) -> f64 {
    let a = q * s;
    if a.abs() < 1e-8 {
        s * (1.0 - a * a / 6.0)
    } else {
        a.sin() / q
    }
}

fn mode_outer(x: f64, lambda: f64, params: &WaveguideParams, k: f64) -> (f64, f64) {
    // returns (C, S) with C = cos-like and S = sin(Q s)/Q-like factor for s = |x| - h
    let s = x.abs() - params.h;
    let diff = lambda - params.d2(k);
    if diff > 0.0 {
        let q = diff.sqrt();
        ((q * s).cos(), sin_over(q, s))
    } else if diff < 0.0 {
        let q = (-diff).sqrt();
        ((q * s).cosh(), (q * s).sinh() / q)
    } else {
        (1.0, s)
    }
}

/// Symmetric mode `v_s(x, lambda)`.
///
/// For `lambda < d^2` the analytic continuation (`cosh`/`sinh`) is used; it
/// reduces to the decaying exponential exactly at the guided roots.
pub fn mode_sym(x: f64, lambda: f64, params: &WaveguideParams, k: f64) -> f64 {
    let sl = lambda.sqrt();
    if x.abs() <= params.h {
        return (x * sl).cos();
    }
    let (c, s) = mode_outer(x, lambda, params, k);
    let (sn, cs) = (params.h * sl).sin_cos();
    cs * c - sl * sn * s
}

/// Antisymmetric mode `v_a(x, lambda)`.
pub fn mode_anti(x: f64, lambda: f64, params: &WaveguideParams, k: f64) -> f64 {
    let sl = lambda.sqrt();
    if x.abs() <= params.h {
        return (x * sl).sin();
    }
    let (c, s) = mode_outer(x, lambda, params, k);
    let (sn, cs) = (params.h * sl).sin_cos();
    x.signum() * (sn * c + sl * cs * s)
}

/// Guided eigenvalues at one frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidedSpectrum {
    pub k: f64,
    pub roots_sym: Vec<f64>,
    pub roots_anti: Vec<f64>,
    pub y_roots_sym: Vec<f64>,
    pub y_roots_anti: Vec<f64>,
}

impl GuidedSpectrum {
    pub fn is_empty(&self) -> bool {
        self.roots_sym.is_empty() && self.roots_anti.is_empty()
    }
}

/// `(ceil(L/pi), ceil(L/pi - 1/2))` clamped at zero.
pub fn guided_counts(level: f64) -> (usize, usize) {
    let t = level / PI;
    let js = t.ceil().max(0.0) as usize;
    let ja = (t - 0.5).ceil().max(0.0) as usize;
    (js, ja)
}

fn bisect<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> f64 {
    // g(lo) < 0 < g(hi) assumed
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Guided roots by bisection in the `y = h sqrt(lambda)` variable.
///
/// Symmetric roots solve `y / |cos y| = L` on `(m pi, m pi + pi/2)`,
/// antisymmetric roots `y / |sin y| = L` on `(m pi + pi/2, (m+1) pi)`.
pub fn guided_roots(params: &WaveguideParams, k: f64) -> Result<GuidedSpectrum> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::domain("guided_roots", format!("k = {k}")));
    }
    let level = params.guided_level(k);
    let (js, ja) = guided_counts(level);
    let h2 = params.h * params.h;
    let mut spec = GuidedSpectrum {
        k,
        roots_sym: Vec::with_capacity(js),
        roots_anti: Vec::with_capacity(ja),
        y_roots_sym: Vec::with_capacity(js),
        y_roots_anti: Vec::with_capacity(ja),
    };
    let gs = |y: f64| y / y.cos().abs() - level;
    for m in 0..js {
        let lo = m as f64 * PI;
        let hi = lo + FRAC_PI_2;
        let hi_in = hi - 1e-15 * hi.max(1.0);
        if !(gs(lo) < 0.0) || !(gs(hi_in) > 0.0) {
            return Err(Error::RootBracket {
                parity: "symmetric",
                index: m,
                detail: format!("L = {level}, g(lo) = {}, g(hi) = {}", gs(lo), gs(hi_in)),
            });
        }
        let y = bisect(gs, lo, hi);
        spec.y_roots_sym.push(y);
        spec.roots_sym.push(y * y / h2);
    }
    let ga = |y: f64| y / y.sin().abs() - level;
    for m in 0..ja {
        let lo = m as f64 * PI + FRAC_PI_2;
        let hi = (m + 1) as f64 * PI;
        let hi_in = hi - 1e-15 * hi;
        if !(ga(lo) < 0.0) || !(ga(hi_in) > 0.0) {
            return Err(Error::RootBracket {
                parity: "antisymmetric",
                index: m,
                detail: format!("L = {level}, g(lo) = {}, g(hi) = {}", ga(lo), ga(hi_in)),
            });
        }
        let y = bisect(ga, lo, hi);
        spec.y_roots_anti.push(y);
        spec.roots_anti.push(y * y / h2);
    }
    Ok(spec)
}

type SpectrumCache = RwLock<HashMap<[u64; 4], Arc<GuidedSpectrum>>>;

fn spectrum_cache() -> &'static SpectrumCache {
    static CACHE: OnceLock<SpectrumCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

const SPECTRUM_CACHE_CAP: usize = 200_000;

/// Cached [`guided_roots`], keyed by the bit patterns of `(h, nbar, n_cl, k)`.
pub fn guided_spectrum(params: &WaveguideParams, k: f64) -> Result<Arc<GuidedSpectrum>> {
    let key = params.cache_key(k);
    if let Some(s) = spectrum_cache()
        .read()
        .expect("spectrum cache poisoned")
        .get(&key)
    {
        return Ok(Arc::clone(s));
    }
    let spec = Arc::new(guided_roots(params, k)?);
    let mut w = spectrum_cache().write().expect("spectrum cache poisoned");
    if w.len() >= SPECTRUM_CACHE_CAP {
        w.clear();
    }
    w.insert(key, Arc::clone(&spec));
    Ok(spec)
}

/// One guided-mode term; `y` is the root in the `y` variable.
fn guided_term(
    parity: Parity,
    y: f64,
    x: f64,
    x0: f64,
    z_dist: f64,
    params: &WaveguideParams,
    k: f64,
) -> Complex64 {
    let h = params.h;
    let level = params.guided_level(k);
    // sqrt(d^2 - lambda) and k beta, both O(1/h)
    let decay = ((level - y) * (level + y)).max(0.0).sqrt() / h;
    let kn = k * params.nbar;
    let kbeta = ((kn - y) * (kn + y)).max(0.0).sqrt() / h;
    let v = |x: f64| -> f64 {
        let inner = x.abs() <= h;
        match (parity, inner) {
            (Parity::Symmetric, true) => (x * y / h).cos(),
            (Parity::Symmetric, false) => y.cos() * (-decay * (x.abs() - h)).exp(),
            (Parity::Antisymmetric, true) => (x * y / h).sin(),
            (Parity::Antisymmetric, false) => x.signum() * y.sin() * (-decay * (x.abs() - h)).exp(),
        }
    };
    let amp = v(x) * v(x0);
    if amp == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let weight = decay / (1.0 + h * decay);
    let prop = Complex64::new(0.0, kbeta * z_dist).exp() / Complex64::new(0.0, 2.0 * kbeta);
    prop * (amp * weight)
}

/// Guided (discrete-spectrum) part `G_{s,g} + G_{a,g}`.
#[allow(clippy::too_many_arguments)]
pub fn green_guided(
    x: f64,
    z: f64,
    x0: f64,
    z0: f64,
    params: &WaveguideParams,
    k: f64,
    spectrum: &GuidedSpectrum,
) -> Complex64 {
    let zd = (z - z0).abs();
    let mut acc = Complex64::new(0.0, 0.0);
    for &y in &spectrum.y_roots_sym {
        acc += guided_term(Parity::Symmetric, y, x, x0, zd, params, k);
    }
    for &y in &spectrum.y_roots_anti {
        acc += guided_term(Parity::Antisymmetric, y, x, x0, zd, params, k);
    }
    acc
}

/// Quadrature settings shared by all spectral evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureOptions {
    pub tolerance: f64,
    /// First panel width at `tau = 0` and `tau = n_cl`, as a fraction of `n_cl`.
    pub refine_fraction: f64,
    pub max_depth: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tolerance: crate::quadrature::DEFAULT_TOLERANCE,
            refine_fraction: 1e-3,
            max_depth: crate::quadrature::DEFAULT_MAX_DEPTH,
        }
    }
}

impl QuadratureOptions {
    pub(crate) fn context(&self, k: f64, n_cl: f64, z_dist: f64) -> SpectralIntegrandContext {
        let mut ctx = SpectralIntegrandContext::new(k, n_cl, z_dist)
            .with_tolerance(self.tolerance)
            .with_refine_step(self.refine_fraction * n_cl);
        ctx.max_depth = self.max_depth;
        ctx
    }
}

/// Per-node quantities of the continuous spectrum at `lambda = k^2 tau^2 + d^2`.
struct ContinuousNode {
    q: f64,
    sqrt_lambda: f64,
    sin_h: f64,
    cos_h: f64,
    w_sym: f64,
    w_anti: f64,
}

impl ContinuousNode {
    fn new(tau: f64, params: &WaveguideParams, k: f64) -> Self {
        let h = params.h;
        let q = k * tau;
        // h sqrt(lambda) = k sqrt(nbar^2 + h^2 (tau^2 - n_cl^2)), no large intermediates
        let inner = params.nbar * params.nbar + h * h * (tau - params.n_cl) * (tau + params.n_cl);
        let phase = k * inner.max(0.0).sqrt();
        let (sin_h, cos_h) = phase.sin_cos();
        let d = params.guided_level(k) / h;
        let q2 = q * q;
        let ds = d * sin_h;
        let dc = d * cos_h;
        let w_sym = if q2 == 0.0 { 0.0 } else { q2 / (q2 + ds * ds) };
        let w_anti = if q2 == 0.0 { 0.0 } else { q2 / (q2 + dc * dc) };
        Self {
            q,
            sqrt_lambda: phase / h,
            sin_h,
            cos_h,
            w_sym,
            w_anti,
        }
    }

    #[inline]
    fn modes(&self, x: f64, h: f64) -> (f64, f64) {
        let ax = x.abs();
        if ax <= h {
            let (s, c) = (x * self.sqrt_lambda).sin_cos();
            return (c, s);
        }
        let s = ax - h;
        let arg = self.q * s;
        let (sn, cs) = arg.sin_cos();
        let ratio = if arg.abs() < 1e-8 { s } else { sn / self.q };
        let vs = self.cos_h * cs - self.sqrt_lambda * self.sin_h * ratio;
        let va = x.signum() * (self.sin_h * cs + self.sqrt_lambda * self.cos_h * ratio);
        (vs, va)
    }
}

/// Continuous parts `(G_{s,c}, G_{a,c})` at many receivers for one source,
/// sharing one adaptive quadrature mesh.
pub fn continuous_on_points(
    params: &WaveguideParams,
    k: f64,
    source: Point,
    points: &[Point],
    opts: &QuadratureOptions,
) -> Result<Vec<(Complex64, Complex64)>> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let zmin = points
        .iter()
        .map(|p| (p.z - source.z).abs())
        .fold(f64::INFINITY, f64::min);
    if !(zmin > 0.0) {
        return Err(Error::domain(
            "green_continuous",
            "receiver at |z - z0| = 0: kernel has no decay",
        ));
    }
    let ctx = opts.context(k, params.n_cl, zmin);
    let h = params.h;
    let zd: Vec<f64> = points.iter().map(|p| (p.z - source.z).abs()).collect();
    let scale = 1.0 / (2.0 * PI);
    let res = integrate_spectral_batch(
        2 * points.len(),
        |node: &SpectralNode, out: &mut [Complex64]| {
            let cn = ContinuousNode::new(node.tau, params, k);
            let (s0, a0) = cn.modes(source.x, h);
            let fs = scale * s0 * cn.w_sym;
            let fa = scale * a0 * cn.w_anti;
            for (i, p) in points.iter().enumerate() {
                let (vs, va) = cn.modes(p.x, h);
                let ker = node.kernel(k, zd[i]);
                out[2 * i] = ker * (vs * fs);
                out[2 * i + 1] = ker * (va * fa);
            }
        },
        &ctx,
    )?;
    Ok(res.values.chunks_exact(2).map(|c| (c[0], c[1])).collect())
}

/// One continuous component at a single receiver.
#[allow(clippy::too_many_arguments)]
pub fn green_continuous(
    x: f64,
    z: f64,
    x0: f64,
    z0: f64,
    params: &WaveguideParams,
    k: f64,
    parity: Parity,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    let v = continuous_on_points(params, k, Point::new(x0, z0), &[Point::new(x, z)], opts)?;
    Ok(match parity {
        Parity::Symmetric => v[0].0,
        Parity::Antisymmetric => v[0].1,
    })
}

/// Components of `G` at one receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenParts {
    pub guided: Complex64,
    pub sym_cont: Complex64,
    pub anti_cont: Complex64,
    pub total: Complex64,
}

impl GreenParts {
    fn assemble(guided: Complex64, sym_cont: Complex64, anti_cont: Complex64) -> Self {
        Self {
            guided,
            sym_cont,
            anti_cont,
            total: guided + sym_cont + anti_cont,
        }
    }
}

/// Full Green function at many receivers for one source.
pub fn green_on_points(
    params: &WaveguideParams,
    k: f64,
    source: Point,
    points: &[Point],
    opts: &QuadratureOptions,
) -> Result<Vec<GreenParts>> {
    for p in points {
        if p.x == source.x && p.z == source.z {
            return Err(Error::domain(
                "green_total",
                "receiver coincides with source",
            ));
        }
    }
    let spectrum = guided_spectrum(params, k)?;
    let cont = continuous_on_points(params, k, source, points, opts)?;
    Ok(points
        .iter()
        .zip(cont)
        .map(|(p, (s, a))| {
            let g = green_guided(p.x, p.z, source.x, source.z, params, k, &spectrum);
            GreenParts::assemble(g, s, a)
        })
        .collect())
}

/// Full Green function `G(x, z; x0, z0)` at one receiver.
pub fn green_total(
    x: f64,
    z: f64,
    x0: f64,
    z0: f64,
    params: &WaveguideParams,
    k: f64,
    opts: &QuadratureOptions,
) -> Result<GreenParts> {
    Ok(green_on_points(params, k, Point::new(x0, z0), &[Point::new(x, z)], opts)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::hankel_green;

    fn reference(h: f64) -> WaveguideParams {
        WaveguideParams::new(h, FRAC_PI_2, 1.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(WaveguideParams::new(0.1, 0.05, 1.0).is_err());
        assert!(WaveguideParams::new(-0.1, 1.0, 1.0).is_err());
        let p = reference(0.005);
        assert!((p.n_h() - FRAC_PI_2 / 0.005).abs() < 1e-9);
        assert!(p.d2(1.0) > 0.0);
    }

    #[test]
    fn mode_values_and_continuity() {
        let p = reference(0.05);
        let k = 2.5;
        let d2 = p.d2(k);
        for &lambda in &[0.5 * d2, 2.0 * d2, d2] {
            assert_eq!(mode_sym(0.0, lambda, &p, k), 1.0);
            assert_eq!(mode_anti(0.0, lambda, &p, k), 0.0);
            let hm = p.h * (1.0 - 1e-15);
            let hp = p.h * (1.0 + 1e-15);
            assert!((mode_sym(hm, lambda, &p, k) - mode_sym(hp, lambda, &p, k)).abs() < 1e-12);
            assert!((mode_anti(hm, lambda, &p, k) - mode_anti(hp, lambda, &p, k)).abs() < 1e-12);
            for &x in &[0.5, 1.0, 2.0] {
                assert_eq!(mode_anti(-x, lambda, &p, k), -mode_anti(x, lambda, &p, k));
                assert_eq!(mode_sym(-x, lambda, &p, k), mode_sym(x, lambda, &p, k));
            }
        }
    }

    #[test]
    fn branch_forms_agree_at_guided_root() {
        let p = reference(0.2);
        let k = 2.5;
        let spec = guided_roots(&p, k).unwrap();
        let lam = spec.roots_sym[0];
        let x = 2.0 * p.h;
        let q = (p.d2(k) - lam).sqrt();
        let expected = (p.h * lam.sqrt()).cos() * (-q * p.h).exp();
        assert!((mode_sym(x, lam, &p, k) - expected).abs() < 1e-9);
        let lam = spec.roots_anti[0];
        let q = (p.d2(k) - lam).sqrt();
        let expected = (p.h * lam.sqrt()).sin() * (-q * p.h).exp();
        assert!((mode_anti(x, lam, &p, k) - expected).abs() < 1e-9);
    }

    // dense sign-scan oracle on y in (0, L]
    fn scan_counts(level: f64) -> (usize, usize) {
        let n = 10_000;
        let (mut s, mut a) = (0, 0);
        let fs = |y: f64| y * y - level * level * y.cos() * y.cos();
        let fa = |y: f64| y * y - level * level * y.sin() * y.sin();
        let mut prev = 1e-12;
        for i in 1..=n {
            let y = level * i as f64 / n as f64;
            if fs(prev) * fs(y) < 0.0 && (0.5 * (prev + y)).tan() > 0.0 {
                s += 1;
            }
            if fa(prev) * fa(y) < 0.0 && 1.0 / (0.5 * (prev + y)).tan() < 0.0 {
                a += 1;
            }
            prev = y;
        }
        // root at y = L itself when L is a multiple of pi
        (s, a)
    }

    #[test]
    fn counts_for_reference_cases() {
        let p = reference(0.005);
        let s = guided_roots(&p, 1.0).unwrap();
        assert_eq!((s.roots_sym.len(), s.roots_anti.len()), (1, 0));
        let y = s.y_roots_sym[0];
        let level = (FRAC_PI_2.powi(2) - 0.005f64.powi(2)).sqrt();
        assert!((y / y.cos() - level).abs() < 1e-10);
        let s = guided_roots(&p, 2.5).unwrap();
        assert_eq!((s.roots_sym.len(), s.roots_anti.len()), (2, 1));
        let last = *s.y_roots_sym.last().unwrap();
        assert!(last > PI && last < 1.5 * PI);
        assert!((last - 3.570_791_858).abs() < 1e-9);
        assert!((s.y_roots_sym[0] - 1.247_515_763).abs() < 1e-9);
        assert!((s.y_roots_anti[0] - 2.463_481_110).abs() < 1e-9);
        assert_eq!(scan_counts(p.guided_level(2.5)), (2, 1));
        for i in 1..50 {
            let k = 0.02 * i as f64;
            if k * FRAC_PI_2 <= FRAC_PI_2 {
                assert!(guided_roots(&p, k).unwrap().roots_anti.is_empty());
            }
        }
    }

    #[test]
    fn roots_satisfy_sign_conditions() {
        let p = WaveguideParams::new(0.1, 3.0, 1.2).unwrap();
        let s = guided_roots(&p, 4.0).unwrap();
        for w in s.y_roots_sym.windows(2) {
            assert!(w[1] > w[0]);
        }
        for &y in &s.y_roots_sym {
            assert!(y.tan() > 0.0);
        }
        for &y in &s.y_roots_anti {
            assert!(1.0 / y.tan() < 0.0);
        }
        for &l in s.roots_sym.iter().chain(&s.roots_anti) {
            assert!(l > 0.0 && l < p.d2(4.0));
        }
    }

    #[test]
    fn guided_part_vanishes_for_thin_core() {
        let p = reference(0.005);
        let spec = guided_spectrum(&p, 1.0).unwrap();
        let g = green_guided(1.5, 3.0, 1.0, 0.0, &p, 1.0, &spec);
        assert!(g.norm() < 1e-40);
        let empty = GuidedSpectrum {
            k: 1.0,
            roots_sym: vec![],
            roots_anti: vec![],
            y_roots_sym: vec![],
            y_roots_anti: vec![],
        };
        assert_eq!(
            green_guided(0.3, 1.0, 0.3, 0.0, &p, 1.0, &empty),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn guided_part_thick_core_matches_direct_summand() {
        let p = reference(0.2);
        let k = 2.5;
        let spec = guided_roots(&p, k).unwrap();
        let (x, x0, zd) = (0.3, 0.3, 1.0);
        let g = green_guided(x, zd, x0, 0.0, &p, k, &spec);
        assert!(g.norm() > 1e-6);
        // re-derive each term from lambda directly
        let d2 = p.d2(k);
        let nh = p.n_h();
        let mut direct = Complex64::new(0.0, 0.0);
        for (&lam, sym) in spec
            .roots_sym
            .iter()
            .map(|l| (l, true))
            .chain(spec.roots_anti.iter().map(|l| (l, false)))
        {
            let sl = lam.sqrt();
            let q = (d2 - lam).sqrt();
            let v = |x: f64| {
                let base = if sym {
                    (p.h * sl).cos()
                } else {
                    x.signum() * (p.h * sl).sin()
                };
                base * (-q * (x.abs() - p.h)).exp()
            };
            let kb = (k * k * nh * nh - lam).sqrt();
            let prop = Complex64::new(0.0, kb * zd).exp() / Complex64::new(0.0, 2.0 * kb);
            direct += prop * (v(x) * v(x0) * q / (1.0 + p.h * q));
        }
        assert!((g - direct).norm() < 1e-10 * direct.norm().max(1e-300));
    }

    #[test]
    fn continuous_parity() {
        let p = reference(0.05);
        let o = QuadratureOptions::default();
        let k = 1.7;
        let a = green_continuous(0.7, 3.0, 1.0, 0.0, &p, k, Parity::Antisymmetric, &o).unwrap();
        let b = green_continuous(-0.7, 3.0, 1.0, 0.0, &p, k, Parity::Antisymmetric, &o).unwrap();
        assert!((a + b).norm() < 1e-12);
        let a = green_continuous(0.7, 3.0, 1.0, 0.0, &p, k, Parity::Symmetric, &o).unwrap();
        let b = green_continuous(-0.7, 3.0, 1.0, 0.0, &p, k, Parity::Symmetric, &o).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn index_matched_core_is_free_space() {
        let p = WaveguideParams::index_matched(0.05, 1.0).unwrap();
        let o = QuadratureOptions::default();
        for &(x, z) in &[(1.5, 2.0), (-0.5, 3.0), (0.2, 1.0)] {
            let g = green_total(x, z, 1.0, 0.0, &p, 1.3, &o).unwrap();
            let r = ((x - 1.0f64).powi(2) + z * z).sqrt();
            let h = hankel_green(1.3, 1.0, r).unwrap();
            assert!((g.total - h).norm() < 1e-6, "{:?} vs {h}", g.total);
        }
    }

    #[test]
    fn reciprocity() {
        let p = reference(0.02);
        let o = QuadratureOptions::default();
        for &(x, z, x0, z0) in &[
            (1.2, 2.0, 0.8, -0.5),
            (-0.9, 3.1, 1.1, 0.4),
            (0.5, -2.0, 1.5, 0.0),
        ] {
            let a = green_total(x, z, x0, z0, &p, 1.9, &o).unwrap().total;
            let b = green_total(x0, z0, x, z, &p, 1.9, &o).unwrap().total;
            assert!((a - b).norm() < 2.0 * o.tolerance);
        }
    }

    #[test]
    fn parts_sum_exactly() {
        let p = reference(0.2);
        let g = green_total(0.5, 2.0, 0.4, 0.0, &p, 2.5, &QuadratureOptions::default()).unwrap();
        assert_eq!(g.total, g.guided + g.sym_cont + g.anti_cont);
    }

    #[test]
    fn coincident_source_rejected() {
        let p = reference(0.05);
        assert!(green_total(1.0, 0.0, 1.0, 0.0, &p, 1.0, &QuadratureOptions::default()).is_err());
    }
}
