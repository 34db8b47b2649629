//! Free-space Green function, half-plane images, first-order correction
//! fields and the regime-dependent thin-core approximation of `G`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_spectral_batch, SpectralNode};
use crate::specfun::hankel_green;
use crate::waveguide::{QuadratureOptions, WaveguideParams};
use crate::Point;

/// Tolerance on `sin(k nbar)` / `cos(k nbar)` for exact regime classification.
pub const RESONANCE_EPS: f64 = 1e-9;

/// `H(x, z; x0, z0) = -(i/4) H0(1)(k n_cl r)`.
pub fn h_free(x: f64, z: f64, x0: f64, z0: f64, k: f64, n_cl: f64) -> Result<Complex64> {
    let r = (x - x0).hypot(z - z0);
    if r == 0.0 {
        return Err(Error::domain("h_free", "receiver coincides with source"));
    }
    hankel_green(k, n_cl, r)
}

/// `H` by quadrature of its plane-wave expansion; diagnostic counterpart of [`h_free`].
#[allow(clippy::too_many_arguments)]
pub fn h_free_spectral(
    x: f64,
    z: f64,
    x0: f64,
    z0: f64,
    k: f64,
    n_cl: f64,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    let zd = (z - z0).abs();
    if !(zd > 0.0) {
        return Err(Error::domain("h_free_spectral", "needs |z - z0| > 0"));
    }
    let ctx = opts.context(k, n_cl, zd);
    let dx = x - x0;
    let res = integrate_spectral_batch(
        1,
        |node: &SpectralNode, out: &mut [Complex64]| {
            out[0] = node.kernel(k, zd) * ((k * node.tau * dx).cos() / (2.0 * PI));
        },
        &ctx,
    )?;
    Ok(res.values[0])
}

/// `(H_s, H_a)`: even and odd parts of `H` in `x` with respect to the core line.
pub fn h_images(
    x: f64,
    z: f64,
    x0: f64,
    z0: f64,
    k: f64,
    n_cl: f64,
) -> Result<(Complex64, Complex64)> {
    let direct = h_free(x, z, x0, z0, k, n_cl)?;
    let image = h_free(-x, z, x0, z0, k, n_cl)
        .map_err(|_| Error::domain("h_images", "mirror image coincides with source"))?;
    Ok((0.5 * (direct + image), 0.5 * (direct - image)))
}

/// First-order correction fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Correction {
    PhiS,
    PhiA,
    PsiS,
    PsiA,
}

fn check_trig(c: Correction, k: f64, nbar: f64) -> Result<()> {
    let (s, co) = (k * nbar).sin_cos();
    match c {
        Correction::PhiS if s.abs() <= RESONANCE_EPS => Err(Error::Resonant {
            k,
            what: "Phi_s (sin(k nbar) = 0)",
        }),
        Correction::PhiA if co.abs() <= RESONANCE_EPS => Err(Error::Resonant {
            k,
            what: "Phi_a (cos(k nbar) = 0)",
        }),
        _ => Ok(()),
    }
}

// sin(a tau)/tau, with the tau -> 0 limit
#[inline]
fn sin_over_tau(a: f64, tau: f64) -> f64 {
    let t = a * tau;
    if t.abs() < 1e-8 {
        a
    } else {
        t.sin() / tau
    }
}

/// Weighted combination `sum_j c_j F_j` of correction fields at many receivers.
///
/// All terms share one quadrature mesh; `Psi` terms include their plane-wave
/// remainder `-k n_cl e^{ik n_cl |z - z0|} / (8i)`.
///
/// `Psi_a` uses the integrand `sgn(x x0) (tau^2 + n_cl^2) / (2 tau)`. Expanding
/// `v_a` at `cos(k nbar) = 0` gives the same first-order mode perturbation as
/// `v_s` at `sin(k nbar) = 0`; the variant `(3 tau^2 - n_cl^2) / (2 tau)` leaves an
/// `O(h)` residual against the exact field.
pub fn corrections_on_points(
    terms: &[(Correction, f64)],
    k: f64,
    n_cl: f64,
    nbar: f64,
    source: Point,
    points: &[Point],
    opts: &QuadratureOptions,
) -> Result<Vec<Complex64>> {
    for &(c, _) in terms {
        check_trig(c, k, nbar)?;
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    if source.x == 0.0 || points.iter().any(|p| p.x == 0.0) {
        return Err(Error::domain("correction field", "needs |x|, |x0| > 0"));
    }
    let zd: Vec<f64> = points.iter().map(|p| (p.z - source.z).abs()).collect();
    let zmin = zd.iter().copied().fold(f64::INFINITY, f64::min);
    if !(zmin > 0.0) {
        return Err(Error::domain("correction field", "needs |z - z0| > 0"));
    }
    let kn = k * nbar;
    let a_sym = 1.0 / (kn.tan() * kn) + 1.0;
    let a_anti = kn.tan() / kn - 1.0;
    let sgn: Vec<f64> = points.iter().map(|p| (p.x * source.x).signum()).collect();
    let sep: Vec<f64> = points.iter().map(|p| p.x.abs() + source.x.abs()).collect();
    let pre = k / (2.0 * PI);
    // coefficient of tau sin(k tau s) and of sin(k tau s)/tau, per parity class
    let mut even = (0.0, 0.0);
    let mut odd = (0.0, 0.0);
    let mut plane_even = 0.0;
    let mut plane_odd = 0.0;
    for &(c, w) in terms {
        match c {
            Correction::PhiS => even.0 -= w * a_sym,
            Correction::PsiS => {
                even.0 += 0.5 * w;
                even.1 += 0.5 * w * n_cl * n_cl;
                plane_even += w;
            }
            Correction::PhiA => odd.0 += w * a_anti,
            Correction::PsiA => {
                odd.0 += 0.5 * w;
                odd.1 += 0.5 * w * n_cl * n_cl;
                plane_odd += w;
            }
        }
    }
    let ctx = opts.context(k, n_cl, zmin);
    let res = integrate_spectral_batch(
        points.len(),
        |node: &SpectralNode, out: &mut [Complex64]| {
            let tau = node.tau;
            for i in 0..out.len() {
                let a = k * sep[i];
                let st = sin_over_tau(a, tau);
                let lin = tau * tau * st;
                let g = (even.0 + sgn[i] * odd.0) * lin + (even.1 + sgn[i] * odd.1) * st;
                out[i] = node.kernel(k, zd[i]) * (pre * g);
            }
        },
        &ctx,
    )?;
    let plane = Complex64::new(0.0, 1.0) * (k * n_cl / 8.0);
    Ok(res
        .values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let c = plane_even + sgn[i] * plane_odd;
            if c == 0.0 {
                v
            } else {
                // -k n e^{ikn|dz|}/(8i) = (i k n / 8) e^{ikn|dz|}
                v + plane * Complex64::new(0.0, k * n_cl * zd[i]).exp() * c
            }
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn single(
    c: Correction,
    x: f64,
    z: f64,
    x0: f64,
    z0: f64,
    k: f64,
    n_cl: f64,
    nbar: f64,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    Ok(corrections_on_points(
        &[(c, 1.0)],
        k,
        n_cl,
        nbar,
        Point::new(x0, z0),
        &[Point::new(x, z)],
        opts,
    )?[0])
}

/// `Phi_s`; requires `sin(k nbar) != 0`.
#[allow(clippy::too_many_arguments)]
pub fn phi_s(
    x: f64,
    z: f64,
    x0: f64,
    z0: f64,
    k: f64,
    n_cl: f64,
    nbar: f64,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    single(Correction::PhiS, x, z, x0, z0, k, n_cl, nbar, opts)
}

/// `Phi_a`; requires `cos(k nbar) != 0`.
#[allow(clippy::too_many_arguments)]
pub fn phi_a(
    x: f64,
    z: f64,
    x0: f64,
    z0: f64,
    k: f64,
    n_cl: f64,
    nbar: f64,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    single(Correction::PhiA, x, z, x0, z0, k, n_cl, nbar, opts)
}

/// `Psi_s`, the symmetric correction at a symmetric resonance.
#[allow(clippy::too_many_arguments)]
pub fn psi_s(
    x: f64,
    z: f64,
    x0: f64,
    z0: f64,
    k: f64,
    n_cl: f64,
    nbar: f64,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    single(Correction::PsiS, x, z, x0, z0, k, n_cl, nbar, opts)
}

/// `Psi_a`, the antisymmetric correction at an antisymmetric resonance.
#[allow(clippy::too_many_arguments)]
pub fn psi_a(
    x: f64,
    z: f64,
    x0: f64,
    z0: f64,
    k: f64,
    n_cl: f64,
    nbar: f64,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    single(Correction::PsiA, x, z, x0, z0, k, n_cl, nbar, opts)
}

/// Resonance class of a frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeKind {
    NonResonant,
    /// `sin(k nbar) = 0`.
    SymResonant,
    /// `cos(k nbar) = 0`.
    AntiResonant,
}

/// Receiver position relative to the core, as seen from the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    SameSide,
    OppositeSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub side: Side,
}

pub fn classify_kind(k: f64, nbar: f64, eps: f64) -> RegimeKind {
    let (s, c) = (k * nbar).sin_cos();
    if s.abs() <= eps {
        RegimeKind::SymResonant
    } else if c.abs() <= eps {
        RegimeKind::AntiResonant
    } else {
        RegimeKind::NonResonant
    }
}

pub fn classify(x: f64, x0: f64, k: f64, nbar: f64) -> Regime {
    Regime {
        kind: classify_kind(k, nbar, RESONANCE_EPS),
        side: if x * x0 > 0.0 {
            Side::SameSide
        } else {
            Side::OppositeSide
        },
    }
}

/// Image combination `a H_s + b H_a` at order zero.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ImageTerm {
    sym: f64,
    anti: f64,
}

/// One row of the thin-core table: approximations of `G_{s,c}` and `G_{a,c}`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TableEntry {
    sym_cont: (ImageTerm, Correction),
    anti_cont: (ImageTerm, Correction),
}

const HA: ImageTerm = ImageTerm {
    sym: 0.0,
    anti: 1.0,
};
const NEG_HA: ImageTerm = ImageTerm {
    sym: 0.0,
    anti: -1.0,
};
const HS: ImageTerm = ImageTerm {
    sym: 1.0,
    anti: 0.0,
};
const NEG_HS: ImageTerm = ImageTerm {
    sym: -1.0,
    anti: 0.0,
};

/// The thin-core table, one entry per (regime, side).
fn table(regime: Regime) -> TableEntry {
    use Correction::*;
    use RegimeKind::*;
    use Side::*;
    match (regime.kind, regime.side) {
        (NonResonant, SameSide) => TableEntry {
            sym_cont: (HA, PhiS),
            anti_cont: (HA, PhiA),
        },
        (NonResonant, OppositeSide) => TableEntry {
            sym_cont: (NEG_HA, PhiS),
            anti_cont: (HA, PhiA),
        },
        (SymResonant, SameSide) | (SymResonant, OppositeSide) => TableEntry {
            sym_cont: (HS, PsiS),
            anti_cont: (HA, PhiA),
        },
        (AntiResonant, SameSide) => TableEntry {
            sym_cont: (HA, PhiS),
            anti_cont: (HS, PsiA),
        },
        (AntiResonant, OppositeSide) => TableEntry {
            sym_cont: (NEG_HA, PhiS),
            anti_cont: (NEG_HS, PsiA),
        },
    }
}

/// Order of the thin-core approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Order {
    Zero,
    One,
}

/// Thin-core approximation of `G` at many receivers on both sides of the core.
pub fn asymptotic_on_points(
    params: &WaveguideParams,
    k: f64,
    source: Point,
    points: &[Point],
    order: Order,
    opts: &QuadratureOptions,
) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(points.len());
    let mut groups: Vec<(Regime, Vec<usize>)> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if p.x == 0.0 || source.x == 0.0 {
            return Err(Error::domain("asymptotic_g", "needs |x|, |x0| > 0"));
        }
        let (hs, ha) = h_images(p.x, p.z, source.x, source.z, k, params.n_cl)?;
        let regime = classify(p.x, source.x, k, params.nbar);
        let e = table(regime);
        let img = |t: ImageTerm| hs * t.sym + ha * t.anti;
        out.push(img(e.sym_cont.0) + img(e.anti_cont.0));
        match groups.iter_mut().find(|(r, _)| *r == regime) {
            Some((_, v)) => v.push(i),
            None => groups.push((regime, vec![i])),
        }
    }
    if order == Order::One {
        for (regime, idx) in groups {
            let e = table(regime);
            let pts: Vec<Point> = idx.iter().map(|&i| points[i]).collect();
            let terms = [(e.sym_cont.1, params.h), (e.anti_cont.1, params.h)];
            let corr =
                corrections_on_points(&terms, k, params.n_cl, params.nbar, source, &pts, opts)?;
            for (&i, c) in idx.iter().zip(corr) {
                out[i] += c;
            }
        }
    }
    Ok(out)
}

/// Thin-core approximation of `G(x, z; x0, z0)` at order 0 or 1 in `h`.
#[allow(clippy::too_many_arguments)]
pub fn asymptotic_g(
    x: f64,
    z: f64,
    x0: f64,
    z0: f64,
    k: f64,
    params: &WaveguideParams,
    order: Order,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    Ok(asymptotic_on_points(
        params,
        k,
        Point::new(x0, z0),
        &[Point::new(x, z)],
        order,
        opts,
    )?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn opts() -> QuadratureOptions {
        QuadratureOptions::default()
    }

    #[test]
    fn spectral_matches_closed_form() {
        let a = h_free_spectral(0.5, 3.0, 0.0, 0.0, 1.0, 1.0, &opts()).unwrap();
        let b = h_free(0.5, 3.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!((a - b).norm() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn free_space_isometry_and_decay() {
        let a = h_free(0.3, 1.2, -0.4, 0.5, 1.7, 1.0).unwrap();
        let (s, c) = 0.83f64.sin_cos();
        let rot = |x: f64, z: f64| (c * x - s * z + 2.0, s * x + c * z - 1.0);
        let (x, z) = rot(0.3, 1.2);
        let (x0, z0) = rot(-0.4, 0.5);
        let b = h_free(x, z, x0, z0, 1.7, 1.0).unwrap();
        assert!((a - b).norm() < 1e-13);
        let r50 = h_free(50.0, 0.0, 0.0, 0.0, 1.0, 1.0).unwrap().norm();
        let r200 = h_free(200.0, 0.0, 0.0, 0.0, 1.0, 1.0).unwrap().norm();
        assert!((r50 / r200 / 2.0 - 1.0).abs() < 0.05);
        assert!(h_free(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn images() {
        let (hs, ha) = h_images(0.0, 2.0, 1.0, 0.0, 1.3, 1.0).unwrap();
        assert_eq!(ha, Complex64::new(0.0, 0.0));
        assert!(hs.norm() > 0.0);
        let (hs, ha) = h_images(1.0, 2.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        let h = h_free(1.0, 2.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(hs + ha, h);
        let expected = -hankel_green(1.0, 1.0, (4.0f64 + 4.0).sqrt()).unwrap();
        assert!((2.0 * ha - h - expected).norm() < 1e-15);
        assert!(h_images(-1.0, 0.0, 1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn correction_domain_errors() {
        // sin(k nbar) = 0 at k = 2, cos(k nbar) = 0 at k = 1
        assert!(phi_s(1.0, 2.0, 1.0, 0.0, 2.0, 1.0, FRAC_PI_2, &opts()).is_err());
        assert!(phi_a(1.0, 2.0, 1.0, 0.0, 1.0, 1.0, FRAC_PI_2, &opts()).is_err());
        assert!(psi_s(1.0, 2.0, 1.0, 0.0, 2.0, 1.0, FRAC_PI_2, &opts()).is_ok());
        assert!(phi_s(1.0, 0.0, 1.0, 0.0, 2.5, 1.0, FRAC_PI_2, &opts()).is_err());
    }

    #[test]
    fn phi_a_is_odd_in_receiver() {
        let a = phi_a(1.2, 2.0, 1.0, 0.0, 2.5, 1.0, FRAC_PI_2, &opts()).unwrap();
        let b = phi_a(-1.2, 2.0, 1.0, 0.0, 2.5, 1.0, FRAC_PI_2, &opts()).unwrap();
        assert!((a + b).norm() < 1e-14);
        let a = phi_s(1.2, 2.0, 1.0, 0.0, 2.5, 1.0, FRAC_PI_2, &opts()).unwrap();
        let b = phi_s(-1.2, 2.0, 1.0, 0.0, 2.5, 1.0, FRAC_PI_2, &opts()).unwrap();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn psi_integrand_limit_is_finite() {
        assert_eq!(sin_over_tau(3.0, 0.0), 3.0);
        assert!((sin_over_tau(3.0, 1e-10) - 3.0).abs() < 1e-12);
        let v = psi_s(1.0, 2.0, 1.0, 0.0, 2.0, 1.0, FRAC_PI_2, &opts()).unwrap();
        assert!(v.norm().is_finite() && v.norm() > 0.0);
    }

    #[test]
    fn combined_terms_are_linear() {
        let src = Point::new(1.0, 0.0);
        let pts = [Point::new(1.3, 2.0), Point::new(-0.7, 4.0)];
        let (k, n, nb) = (2.5, 1.0, FRAC_PI_2);
        let o = opts();
        let sum = corrections_on_points(
            &[(Correction::PhiS, 0.3), (Correction::PhiA, -2.0)],
            k,
            n,
            nb,
            src,
            &pts,
            &o,
        )
        .unwrap();
        let s = corrections_on_points(&[(Correction::PhiS, 1.0)], k, n, nb, src, &pts, &o).unwrap();
        let a = corrections_on_points(&[(Correction::PhiA, 1.0)], k, n, nb, src, &pts, &o).unwrap();
        for i in 0..2 {
            assert!((sum[i] - (0.3 * s[i] - 2.0 * a[i])).norm() < 1e-8);
        }
    }

    #[test]
    fn regime_classification() {
        let nb = FRAC_PI_2;
        assert_eq!(
            classify_kind(2.5, nb, RESONANCE_EPS),
            RegimeKind::NonResonant
        );
        assert_eq!(
            classify_kind(1.0, nb, RESONANCE_EPS),
            RegimeKind::AntiResonant
        );
        assert_eq!(
            classify_kind(2.0, nb, RESONANCE_EPS),
            RegimeKind::SymResonant
        );
        assert_eq!(
            classify_kind(3.0, nb, RESONANCE_EPS),
            RegimeKind::AntiResonant
        );
        assert_eq!(
            classify_kind(4.0, nb, RESONANCE_EPS),
            RegimeKind::SymResonant
        );
        let mut found = vec![];
        for i in 0..=4250 {
            let k = 0.25 + 1e-3 * i as f64;
            if classify_kind(k, nb, 1e-6) != RegimeKind::NonResonant {
                found.push(k);
            }
        }
        let rounded: Vec<i64> = found.iter().map(|k| k.round() as i64).collect();
        assert_eq!(rounded, vec![1, 2, 3, 4]);
        assert_eq!(classify(-1.0, 1.0, 2.5, nb).side, Side::OppositeSide);
    }

    #[test]
    fn zero_order_table() {
        let p = WaveguideParams::new(0.005, FRAC_PI_2, 1.0).unwrap();
        let o = opts();
        let h = |x: f64| h_free(x, 2.0, 1.0, 0.0, 2.5, 1.0).unwrap();
        // non-resonant
        let g = asymptotic_g(-1.2, 2.0, 1.0, 0.0, 2.5, &p, Order::Zero, &o).unwrap();
        assert!(g.norm() < 1e-15);
        let g = asymptotic_g(1.2, 2.0, 1.0, 0.0, 2.5, &p, Order::Zero, &o).unwrap();
        assert!((g - (h(1.2) - h(-1.2))).norm() < 1e-15);
        // symmetric resonance (k = 2): H on both sides
        for &x in &[1.2, -1.2] {
            let g = asymptotic_g(x, 2.0, 1.0, 0.0, 2.0, &p, Order::Zero, &o).unwrap();
            let hh = h_free(x, 2.0, 1.0, 0.0, 2.0, 1.0).unwrap();
            assert!((g - hh).norm() < 1e-15);
        }
        // antisymmetric resonance (k = 1): -H on the far side
        let g = asymptotic_g(-1.2, 2.0, 1.0, 0.0, 1.0, &p, Order::Zero, &o).unwrap();
        let hh = h_free(-1.2, 2.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!((g + hh).norm() < 1e-15);
    }
}
