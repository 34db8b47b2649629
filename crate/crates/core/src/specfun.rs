//! Order-zero Bessel functions of real argument and the free-space Green value.
//!
//! `J0`/`Y0` use the ascending power series up to [`SERIES_LIMIT`] and the
//! Hankel asymptotic expansion (amplitude/phase polynomials `P`, `Q`,
//! optimally truncated) above it. At the crossover both routes agree to
//! better than `1e-12` absolute.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments at or below this use the power series.
pub const SERIES_LIMIT: f64 = 12.0;

fn series(x: f64) -> (f64, f64) {
    // J0 = sum (-q)^m/(m!)^2, Y0 = 2/pi [(ln(x/2)+gamma) J0 - sum (-q)^m H_m/(m!)^2]
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut j = 1.0;
    let mut ysum = 0.0;
    let mut harmonic = 0.0;
    for m in 1..120 {
        let mf = m as f64;
        term *= -q / (mf * mf);
        harmonic += 1.0 / mf;
        j += term;
        ysum -= term * harmonic;
        if term.abs() < 1e-18 * j.abs().max(1e-300) && m > 3 {
            break;
        }
    }
    let y = (2.0 / PI) * ((0.5 * x).ln() + EULER_GAMMA) * j + (2.0 / PI) * ysum;
    (j, y)
}

fn asymptotic(x: f64) -> (f64, f64) {
    // b_k = prod_{j<=k} (2j-1)^2 / (k! (8x)^k); P = sum (-1)^k b_2k, Q = -sum (-1)^k b_{2k+1}
    let mut p = 1.0;
    let mut q = 0.0;
    let mut b: f64 = 1.0;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        let next = b * odd * odd / (k as f64 * 8.0 * x);
        if next >= b || next < 1e-18 {
            break;
        }
        b = next;
        let half = k / 2;
        let sign = if half % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * b;
        } else {
            q -= sign * b;
        }
    }
    let chi = x - FRAC_PI_4;
    let (s, c) = chi.sin_cos();
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

/// Bessel function of the first kind, order zero, for `x >= 0`.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain("bessel_j0", format!("x = {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok(if x <= SERIES_LIMIT {
        series(x).0
    } else {
        asymptotic(x).0
    })
}

/// Bessel function of the second kind, order zero, for `x > 0`.
pub fn bessel_y0(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("bessel_y0", format!("x = {x}")));
    }
    Ok(if x <= SERIES_LIMIT {
        series(x).1
    } else {
        asymptotic(x).1
    })
}

/// `H0(1)(x) = J0(x) + i Y0(x)` for `x > 0`.
pub fn hankel1_0(x: f64) -> Result<Complex64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("hankel1_0", format!("x = {x}")));
    }
    let (j, y) = if x <= SERIES_LIMIT {
        series(x)
    } else {
        asymptotic(x)
    };
    Ok(Complex64::new(j, y))
}

/// Outgoing free-space Green value `-(i/4) H0(1)(k n_cl r)`.
pub fn hankel_green(k: f64, n_cl: f64, r: f64) -> Result<Complex64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(
            "hankel_green",
            format!("r = {r} (source singularity)"),
        ));
    }
    if !(k > 0.0) || !(n_cl > 0.0) {
        return Err(Error::domain(
            "hankel_green",
            format!("k = {k}, n_cl = {n_cl}"),
        ));
    }
    let h = hankel1_0(k * n_cl * r)?;
    Ok(Complex64::new(0.0, -0.25) * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent references: plain power series summed in f64 with many terms.
    fn j0_series_oracle(x: f64) -> f64 {
        let mut s = 0.0;
        let mut fact = 1.0;
        for m in 0..30 {
            if m > 0 {
                fact *= m as f64;
            }
            s += (-1f64).powi(m) * (x / 2.0).powi(2 * m) / (fact * fact);
        }
        s
    }

    fn y0_series_oracle(x: f64) -> f64 {
        let mut s = 0.0;
        let mut fact = 1.0;
        let mut h = 0.0;
        for m in 1..30 {
            fact *= m as f64;
            h += 1.0 / m as f64;
            s += (-1f64).powi(m + 1) * h * (x / 2.0).powi(2 * m) / (fact * fact);
        }
        2.0 / PI * (((x / 2.0).ln() + EULER_GAMMA) * j0_series_oracle(x) + s)
    }

    #[test]
    fn j0_reference_values() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
        let v = bessel_j0(1.0).unwrap();
        assert!((v - j0_series_oracle(1.0)).abs() < 1e-15);
        assert!((v - 0.765_197_686_6).abs() < 1e-10);
    }

    #[test]
    fn j0_first_zero() {
        // bisection on the oracle
        let (mut a, mut b) = (2.0, 3.0);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if j0_series_oracle(a) * j0_series_oracle(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let z = 0.5 * (a + b);
        assert!((z - 2.404_825_558).abs() < 1e-9);
        assert!(bessel_j0(z).unwrap().abs() < 1e-9);
    }

    #[test]
    fn y0_reference_values() {
        let v = bessel_y0(1.0).unwrap();
        assert!((v - 0.088_256_964_2).abs() < 1e-10);
        assert!((v - y0_series_oracle(1.0)).abs() < 1e-14);
        let a = bessel_y0(1e-3).unwrap();
        let b = bessel_y0(1e-6).unwrap();
        assert!(b < a && a < 0.0);
    }

    #[test]
    fn large_argument_matches_leading_asymptotics() {
        // leading term alone is only good to O(1/(8x)); keep terms through 1/x^2
        let x = 50.0;
        let amp = (2.0 / (PI * x)).sqrt();
        let chi = x - FRAC_PI_4;
        let p = 1.0 - 9.0 / (128.0 * x * x);
        let q = -1.0 / (8.0 * x);
        let lead = amp * chi.sin();
        let expansion = amp * (p * chi.sin() + q * chi.cos());
        let y = bessel_y0(x).unwrap();
        assert!((y - lead).abs() < 3e-4);
        assert!((y - expansion).abs() < 1e-6);
    }

    #[test]
    fn crossover_is_continuous() {
        let lo = series(SERIES_LIMIT);
        let hi = asymptotic(SERIES_LIMIT);
        assert!((lo.0 - hi.0).abs() < 2e-12);
        assert!((lo.1 - hi.1).abs() < 2e-12);
    }

    #[test]
    fn series_oracle_agreement_below_limit() {
        for i in 1..=40 {
            let x = 0.25 * i as f64;
            let j = bessel_j0(x).unwrap();
            let y = bessel_y0(x).unwrap();
            assert!((j - j0_series_oracle(x)).abs() < 1e-10 * j.abs().max(1e-2));
            assert!((y - y0_series_oracle(x)).abs() < 1e-9 * y.abs().max(1e-2));
        }
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j0(-1.0).is_err());
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_y0(0.0).is_err());
        assert!(hankel_green(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn hankel_green_reference() {
        let g = hankel_green(1.0, 1.0, 1.0).unwrap();
        let j = j0_series_oracle(1.0);
        let y = y0_series_oracle(1.0);
        assert!((g.re - y / 4.0).abs() < 1e-14);
        assert!((g.im + j / 4.0).abs() < 1e-14);
        assert!((g.re - 0.022_064_24).abs() < 1e-8);
        assert!((g.im + 0.191_299_42).abs() < 1e-8);
        let a = hankel_green(2.0, 1.5, 0.7).unwrap();
        let b = hankel_green(3.0, 1.0, 0.7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn modulus_decreasing() {
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let x = 10f64.powf(-3.0 + 5.0 * i as f64 / 199.0);
            let m = hankel1_0(x).unwrap().norm_sqr();
            assert!(m < prev, "not decreasing at {x}");
            prev = m;
        }
    }

    #[test]
    fn radial_helmholtz_residual() {
        let k = 1.3;
        let step = 1e-3;
        for &r in &[1.0, 3.0, 7.0] {
            let f = |r: f64| hankel_green(k, 1.0, r).unwrap();
            let d2 = (f(r + step) - f(r) * 2.0 + f(r - step)) / (step * step);
            let d1 = (f(r + step) - f(r - step)) / (2.0 * step);
            let res = d2 + d1 / r + f(r) * (k * k);
            assert!(res.norm() < 1e-5, "r = {r}: {}", res.norm());
        }
    }
}
