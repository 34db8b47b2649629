//! Acceptance suite as library code, shared by the test target and the
//! `selftest` command.
//!
//! Each criterion returns one or more [`CheckLine`]s; an internal error
//! becomes a failing line rather than a panic.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{sample_screen, screen_norm, transform, Point, Pose, Screen, ScreenSample};
use crate::homogeneous::{asymptotic_on_points, h_free, h_free_spectral, h_images, Order};
use crate::inversion::{
    calibrate_c, nelder_mead, run_pipeline, step1_scan, step3_peak_width, InversionConfig,
    NelderMeadOptions, DEFAULT_PEAK_CONSTANT,
};
use crate::synth::{FieldProbe, NoiseModel, NoiseScale, SimulatedProbe};
use crate::waveguide::{
    green_guided, green_on_points, guided_counts, guided_roots, guided_spectrum, QuadratureOptions,
    WaveguideParams,
};

/// One pass/fail line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub id: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:<3} {}  {} ({:.1}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail,
            self.seconds
        )
    }
}

fn line(id: &str, passed: bool, detail: String, start: Instant) -> CheckLine {
    CheckLine {
        id: id.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn guarded(id: &str, f: impl FnOnce() -> Result<Vec<CheckLine>>) -> Vec<CheckLine> {
    let start = Instant::now();
    match f() {
        Ok(lines) => lines,
        Err(e) => vec![line(id, false, format!("error: {e}"), start)],
    }
}

/// Reference waveguide `nbar = pi/2`, `n_cl = 1`.
pub fn reference_waveguide(h: f64) -> Result<WaveguideParams> {
    WaveguideParams::new(h, FRAC_PI_2, 1.0)
}

/// Reference pose `(1, pi/20)`.
pub fn reference_pose() -> Pose {
    Pose {
        x0: 1.0,
        alpha: PI / 20.0,
    }
}

/// Simulated measurements on the reference screen and pose.
pub fn reference_probe(h: f64, noise_level: f64, seed: u64) -> Result<SimulatedProbe> {
    SimulatedProbe::new(
        reference_waveguide(h)?,
        reference_pose(),
        &Screen::default(),
        NoiseModel::new(noise_level, NoiseScale::PerPoint)?,
        seed,
        QuadratureOptions::default(),
    )
}

fn reference_screen_core() -> Result<(Vec<ScreenSample>, Vec<Point>)> {
    let samples = sample_screen(&Screen::default())?;
    let pose = reference_pose();
    let core = samples.iter().map(|s| transform(&pose, s.point)).collect();
    Ok((samples, core))
}

fn diff_norm(a: &[Complex64], b: &[Complex64], samples: &[ScreenSample]) -> Result<f64> {
    let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    screen_norm(&d, samples)
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Free-space function: plane-wave quadrature against the closed form.
pub fn criterion_1() -> Vec<CheckLine> {
    guarded("1", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let opts = QuadratureOptions::default();
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let n_cl = rng.random_range(1.0..1.5);
            let k = rng.random_range(0.5..5.0) / n_cl;
            let r = rng.random_range(0.5..10.0);
            // keep |z - z0| away from zero, where the kernel stops decaying
            let theta = rng.random_range(0.2..PI - 0.2);
            let (x0, z0) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let (x, z) = (x0 + r * theta.cos(), z0 + r * theta.sin());
            let a = h_free_spectral(x, z, x0, z0, k, n_cl, &opts)?;
            let b = h_free(x, z, x0, z0, k, n_cl)?;
            worst = worst.max((a - b).norm());
        }
        Ok(vec![line(
            "1",
            worst <= 1e-6,
            format!("max |H_quad - H| = {worst:.2e} (<= 1e-6)"),
            start,
        )])
    })
}

// dispersion functions in y = h sqrt(lambda), zero at decaying modes
fn disp_sym(y: f64, level: f64) -> f64 {
    y * y.sin() - ((level - y) * (level + y)).max(0.0).sqrt() * y.cos()
}

fn disp_anti(y: f64, level: f64) -> f64 {
    y * y.cos() + ((level - y) * (level + y)).max(0.0).sqrt() * y.sin()
}

fn sign_changes(f: impl Fn(f64) -> f64, level: f64) -> usize {
    let n = (level * 2000.0).ceil().max(2000.0) as usize;
    let mut prev = f(level * 1e-9);
    let mut count = 0;
    for i in 1..=n {
        let v = f(level * i as f64 / n as f64);
        if v != 0.0 && prev != 0.0 && (v > 0.0) != (prev > 0.0) {
            count += 1;
        }
        if v != 0.0 {
            prev = v;
        }
    }
    count
}

/// Guided-root counts: closed form, root finder and a sign-scan oracle agree.
pub fn criterion_2() -> Vec<CheckLine> {
    guarded("2", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut mismatches = Vec::new();
        let mut cases = 0;
        while cases < 200 {
            let h = rng.random_range(0.002..0.3);
            let nbar = rng.random_range(0.2..6.0);
            let k = rng.random_range(0.25..6.0);
            let Ok(p) = WaveguideParams::new(h, nbar, 1.0) else {
                continue;
            };
            cases += 1;
            let level = p.guided_level(k);
            let (js, ja) = guided_counts(level);
            let spec = guided_roots(&p, k)?;
            let os = sign_changes(|y| disp_sym(y, level), level);
            let oa = sign_changes(|y| disp_anti(y, level), level);
            if spec.roots_sym.len() != js || spec.roots_anti.len() != ja || os != js || oa != ja {
                mismatches.push(format!(
                    "(k={k:.3}, nbar={nbar:.3}, h={h:.4}): formula ({js},{ja}) roots ({},{}) scan ({os},{oa})",
                    spec.roots_sym.len(),
                    spec.roots_anti.len()
                ));
            }
        }
        let detail = if mismatches.is_empty() {
            "200/200 parameter sets agree".to_string()
        } else {
            format!("{} mismatches, first {}", mismatches.len(), mismatches[0])
        };
        Ok(vec![line("2", mismatches.is_empty(), detail, start)])
    })
}

/// Guided part on the screen decays exponentially in `1/h`.
///
/// The rate is `gap (x + x0)` with `gap = sqrt(L^2 - y_max^2)` set by the
/// guided root closest to cutoff, so it depends on `k`. The check runs at
/// `k = 3.9`, where that root is well below cutoff, and also requires the
/// fitted slope to match the predicted one.
pub fn criterion_3() -> Vec<CheckLine> {
    guarded("3", || {
        let start = Instant::now();
        let (samples, core) = reference_screen_core()?;
        let k = 3.9;
        let hs = [0.2, 0.1, 0.05];
        let mut logs = Vec::new();
        let mut gap = 0.0;
        for &h in &hs {
            let p = reference_waveguide(h)?;
            let spec = guided_spectrum(&p, k)?;
            let g: Vec<Complex64> = core
                .iter()
                .map(|c| green_guided(c.x, c.z, 1.0, 0.0, &p, k, &spec))
                .collect();
            logs.push(screen_norm(&g, &samples)?.ln());
            let level = p.guided_level(k);
            let y_max = spec
                .y_roots_sym
                .iter()
                .chain(&spec.y_roots_anti)
                .copied()
                .fold(0.0, f64::max);
            gap = ((level - y_max) * (level + y_max)).sqrt();
        }
        let inv: Vec<f64> = hs.iter().map(|h| 1.0 / h).collect();
        let s = slope(&inv, &logs);
        let x_min = core.iter().map(|c| c.x).fold(f64::INFINITY, f64::min);
        let predicted = -gap * (x_min + 1.0);
        let monotone = logs.windows(2).all(|w| w[1] < w[0]);
        let agree = (s / predicted - 1.0).abs() < 0.25;
        Ok(vec![line(
            "3",
            s < -5.0 && monotone && agree,
            format!("d ln||G_g|| / d(1/h) = {s:.2} (< -5) at k = {k}; predicted {predicted:.2}"),
            start,
        )])
    })
}

/// `(H_s, H_a)` at one receiver.
type ImagePair = (Complex64, Complex64);

/// Zero-order regimes on the reference screen.
pub fn criterion_4() -> Vec<CheckLine> {
    guarded("4", || {
        let start = Instant::now();
        let (samples, core) = reference_screen_core()?;
        let mirrored: Vec<Point> = core.iter().map(|p| Point::new(-p.x, p.z)).collect();
        let p = reference_waveguide(0.005)?;
        let opts = QuadratureOptions::default();
        let src = Point::new(1.0, 0.0);
        let field = |k: f64, pts: &[Point]| -> Result<(Vec<Complex64>, Vec<ImagePair>)> {
            let g = green_on_points(&p, k, src, pts, &opts)?
                .iter()
                .map(|g| g.total)
                .collect();
            let hh = pts
                .iter()
                .map(|q| h_images(q.x, q.z, src.x, src.z, k, p.n_cl))
                .collect::<Result<Vec<_>>>()?;
            Ok((g, hh))
        };
        let mut out = Vec::new();
        // (k, screen, label, model built from (H_s, H_a), bound)
        type Model = fn(Complex64, Complex64) -> Complex64;
        let cases: [(f64, bool, &str, Model, f64); 5] = [
            (
                2.5,
                false,
                "k=2.5 same side, G ~ 2H_a",
                |_, a| 2.0 * a,
                0.05,
            ),
            (1.0, false, "k=1 same side, G ~ H", |s, a| s + a, 0.1),
            (1.0, true, "k=1 opposite side, G ~ -H", |s, a| -(s + a), 0.1),
            (2.0, false, "k=2 same side, G ~ H", |s, a| s + a, 0.1),
            (2.0, true, "k=2 opposite side, G ~ H", |s, a| s + a, 0.1),
        ];
        for (k, opposite, label, model, bound) in cases {
            let pts = if opposite { &mirrored } else { &core };
            let (g, hh) = field(k, pts)?;
            let m: Vec<Complex64> = hh.iter().map(|&(s, a)| model(s, a)).collect();
            // on the mirrored screen H is evaluated at the mirrored point
            let rel = diff_norm(&g, &m, &samples)? / screen_norm(&g, &samples)?;
            out.push(line(
                "4",
                rel <= bound,
                format!("{label}: relative L2 residual {rel:.2e} (<= {bound})"),
                start,
            ));
        }
        Ok(out)
    })
}

fn residual_orders(k: f64, order: Order, hs: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (samples, core) = reference_screen_core()?;
    let opts = QuadratureOptions::default();
    let src = Point::new(1.0, 0.0);
    let mut res = Vec::new();
    for &h in hs {
        let p = reference_waveguide(h)?;
        let g: Vec<Complex64> = green_on_points(&p, k, src, &core, &opts)?
            .iter()
            .map(|g| g.total)
            .collect();
        let a = asymptotic_on_points(&p, k, src, &core, order, &opts)?;
        res.push(diff_norm(&g, &a, &samples)?);
    }
    let lh: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let lr: Vec<f64> = res.iter().map(|r| r.ln()).collect();
    Ok((slope(&lh, &lr), res))
}

/// Convergence orders of the asymptotic expansions in `h`.
///
/// The resonant zero-order line applies the `>= 1.1` bound literally; the
/// residual `||G - H||` is `O(h)` at a resonance, so it is reported as a
/// failure. The resonant first-order line shows the expansion itself is sound.
pub fn criterion_5() -> Vec<CheckLine> {
    guarded("5", || {
        let start = Instant::now();
        let hs = [0.04, 0.02, 0.01];
        let (o_nr, r_nr) = residual_orders(2.5, Order::One, &hs)?;
        let mut out = vec![line(
            "5a",
            (o_nr - 2.0).abs() <= 0.4,
            format!(
                "non-resonant first order, k=2.5: order {o_nr:.2} (2 +- 0.4), residuals {}",
                sci(&r_nr)
            ),
            start,
        )];
        for k in [1.0, 2.0] {
            let (o0, r0) = residual_orders(k, Order::Zero, &hs)?;
            out.push(line(
                "5b",
                o0 >= 1.1,
                format!(
                    "resonant zero order, k={k}: order {o0:.2} (>= 1.1), residuals {}",
                    sci(&r0)
                ),
                start,
            ));
        }
        for k in [1.0, 2.0] {
            let (o1, r1) = residual_orders(k, Order::One, &hs)?;
            out.push(line(
                "5c",
                o1 >= 1.5,
                format!(
                    "resonant first order, k={k}: order {o1:.2} (>= 1.5), residuals {}",
                    sci(&r1)
                ),
                start,
            ));
        }
        Ok(out)
    })
}

/// Controlled thicknesses and noise seed used to calibrate `C` before the
/// end-to-end error runs.
pub const CALIBRATION_RUNS: [f64; 2] = [0.01, 0.03];
pub const CALIBRATION_SEED: u64 = 1000;

/// `C` from two controlled 3 %-noise experiments, computed once per process.
pub fn calibrated_peak_constant() -> Result<f64> {
    static C: OnceLock<std::result::Result<f64, String>> = OnceLock::new();
    C.get_or_init(|| {
        let cfg = InversionConfig::default();
        let mut runs = Vec::new();
        for (i, &h) in CALIBRATION_RUNS.iter().enumerate() {
            let probe =
                reference_probe(h, 0.03, CALIBRATION_SEED + i as u64).map_err(|e| e.to_string())?;
            let scan = step1_scan(&probe, 1.0, &cfg).map_err(|e| e.to_string())?;
            let d1 = step3_peak_width(&scan, cfg.beta, 1).map_err(|e| e.to_string())?;
            runs.push((h, d1));
        }
        calibrate_c(&runs).map_err(|e| e.to_string())
    })
    .clone()
    .map_err(|e| crate::Error::Config(format!("calibration failed: {e}")))
}

/// Per-seed relative errors of one end-to-end run set.
#[derive(Debug, Clone, Default)]
pub struct TableErrors {
    pub khat1: Vec<f64>,
    pub nbar: Vec<f64>,
    pub x0: Vec<f64>,
    pub alpha: Vec<f64>,
    pub h_lin: Vec<f64>,
    pub h_peak: Vec<f64>,
    pub failures: Vec<String>,
}

/// Runs the pipeline on five 3 %-noise seeds with the calibrated `C`.
pub fn table_errors(h: f64) -> Result<TableErrors> {
    let cfg = InversionConfig {
        peak_constant: calibrated_peak_constant()?,
        ..InversionConfig::default()
    };
    let base = reference_probe(h, 0.03, 0)?;
    let mut t = TableErrors::default();
    for seed in 1..=5 {
        let probe = base.with_seed(seed);
        let r = run_pipeline(&probe, 1.0, &cfg, Some(&probe.truth()))?;
        let e = r.errors_rel.unwrap_or_default();
        let inf = f64::INFINITY;
        t.khat1.push(e.khat1.unwrap_or(inf));
        t.nbar.push(e.nbar.unwrap_or(inf));
        t.x0.push(e.x0.unwrap_or(inf));
        t.alpha.push(e.alpha.unwrap_or(inf));
        t.h_lin.push(e.h_lin.unwrap_or(inf));
        t.h_peak.push(e.h_peak.unwrap_or(inf));
        t.failures.extend(
            r.diagnostics
                .failures
                .iter()
                .map(|f| format!("seed {seed}: {}: {}", f.stage, f.message)),
        );
    }
    Ok(t)
}

fn band(id: &str, name: &str, errs: &[f64], bound: f64, start: Instant) -> CheckLine {
    let m = median(errs.to_vec());
    line(
        id,
        m <= bound,
        format!(
            "median rel. error {name} = {:.3}% (<= {}%)",
            100.0 * m,
            100.0 * bound
        ),
        start,
    )
}

/// Reference setup, `h = 0.005`.
pub fn criterion_6() -> Vec<CheckLine> {
    guarded("6", || {
        let start = Instant::now();
        let t = table_errors(0.005)?;
        let mut out = vec![
            band("6", "khat1", &t.khat1, 0.005, start),
            band("6", "nbar", &t.nbar, 0.005, start),
            band("6", "x0", &t.x0, 0.05, start),
            band("6", "alpha", &t.alpha, 0.15, start),
            band("6", "h (peak width)", &t.h_peak, 0.25, start),
        ];
        if let Some(f) = t.failures.first() {
            out.push(line("6", false, format!("stage failure {f}"), start));
        }
        Ok(out)
    })
}

/// Reference setup, `h = 0.05`.
pub fn criterion_7() -> Vec<CheckLine> {
    guarded("7", || {
        let start = Instant::now();
        let t = table_errors(0.05)?;
        let mut out = vec![
            band("7", "h (peak width)", &t.h_peak, 0.10, start),
            band("7", "h (linearized, k = 2.99 khat1)", &t.h_lin, 0.25, start),
        ];
        if let Some(f) = t.failures.first() {
            out.push(line("7", false, format!("stage failure {f}"), start));
        }
        Ok(out)
    })
}

/// Thicknesses of the peak-width sweep.
pub const WIDTH_SWEEP: [f64; 6] = [0.005, 0.01, 0.02, 0.03, 0.04, 0.05];

/// `delta_p` for `p = 1..=4` on noiseless reference data; rows follow [`WIDTH_SWEEP`].
pub fn width_table() -> Result<Vec<[f64; 4]>> {
    let cfg = InversionConfig::default();
    let mut rows = Vec::new();
    for &h in &WIDTH_SWEEP {
        let probe = reference_probe(h, 0.0, 0)?;
        let scan = step1_scan(&probe, 1.0, &cfg)?;
        let mut row = [0.0; 4];
        for (p, slot) in row.iter_mut().enumerate() {
            *slot = step3_peak_width(&scan, cfg.beta, p + 1)?;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Peak-width law `delta_p = (C / p) h`.
pub fn criterion_8() -> Vec<CheckLine> {
    guarded("8", || {
        let start = Instant::now();
        let rows = width_table()?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (h, row) in WIDTH_SWEEP.iter().zip(&rows) {
            for (p, d) in row.iter().enumerate() {
                xs.push(h / (p + 1) as f64);
                ys.push(*d);
            }
        }
        let c_fit = xs.iter().zip(&ys).map(|(x, y)| x * y).sum::<f64>()
            / xs.iter().map(|x| x * x).sum::<f64>();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let ss_res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - c_fit * x).powi(2))
            .sum();
        let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
        let r2 = 1.0 - ss_res / ss_tot;
        let scaled: Vec<String> = rows
            .iter()
            .zip(WIDTH_SWEEP)
            .map(|(r, h)| {
                let v: Vec<String> = r
                    .iter()
                    .enumerate()
                    .map(|(p, d)| format!("{:.3}", d * (p + 1) as f64 / h))
                    .collect();
                format!("h={h}: [{}]", v.join(", "))
            })
            .collect();
        // linearity in h for each p on its own
        let mut r2_per_p = [0.0; 4];
        for (p, slot) in r2_per_p.iter_mut().enumerate() {
            let d: Vec<f64> = rows.iter().map(|r| r[p]).collect();
            let cp = WIDTH_SWEEP.iter().zip(&d).map(|(h, y)| h * y).sum::<f64>()
                / WIDTH_SWEEP.iter().map(|h| h * h).sum::<f64>();
            let m = d.iter().sum::<f64>() / d.len() as f64;
            let res: f64 = WIDTH_SWEEP
                .iter()
                .zip(&d)
                .map(|(h, y)| (y - cp * h).powi(2))
                .sum();
            let tot: f64 = d.iter().map(|y| (y - m).powi(2)).sum();
            *slot = 1.0 - res / tot;
        }
        let r2_min = r2_per_p.iter().copied().fold(f64::INFINITY, f64::min);
        let runs: Vec<(f64, f64)> = WIDTH_SWEEP
            .iter()
            .zip(&rows)
            .map(|(h, r)| (*h, r[0]))
            .collect();
        let c = calibrate_c(&runs)?;
        let c_err = (c - DEFAULT_PEAK_CONSTANT).abs() / DEFAULT_PEAK_CONSTANT;
        Ok(vec![
            line(
                "8a",
                r2 >= 0.9,
                format!("fit delta_p = (C/p) h: R^2 = {r2:.3} (>= 0.9), C = {c_fit:.4}; p delta_p / h {}", scaled.join("; ")),
                start,
            ),
            line(
                "8b",
                c_err <= 0.3,
                format!("calibrated C = {c:.4}, {:.1}% from 0.11824 (<= 30%)", 100.0 * c_err),
                start,
            ),
            line(
                "8c",
                r2_min >= 0.9,
                format!("delta_p = C_p h for each p separately: min R^2 = {r2_min:.4} (>= 0.9)"),
                start,
            ),
        ])
    })
}

/// Property suites: reciprocity, parity, image split, Helmholtz residual,
/// noise statistics, optimizer descent and determinism.
pub fn criterion_9() -> Vec<CheckLine> {
    let mut out = Vec::new();
    out.extend(guarded("9", || {
        let start = Instant::now();
        let opts = QuadratureOptions::default();
        let p = reference_waveguide(0.05)?;
        let mut worst: f64 = 0.0;
        for (a, b) in [
            ((0.7, 0.3), (-1.2, 2.5)),
            ((1.5, -1.0), (0.4, 1.0)),
            ((-0.3, 0.0), (-2.0, 3.0)),
        ] {
            let g1 = green_on_points(
                &p,
                1.3,
                Point::new(a.0, a.1),
                &[Point::new(b.0, b.1)],
                &opts,
            )?[0]
                .total;
            let g2 = green_on_points(
                &p,
                1.3,
                Point::new(b.0, b.1),
                &[Point::new(a.0, a.1)],
                &opts,
            )?[0]
                .total;
            worst = worst.max((g1 - g2).norm() / g1.norm());
        }
        Ok(vec![line(
            "9",
            worst < 1e-6,
            format!("reciprocity: max rel. asymmetry {worst:.1e}"),
            start,
        )])
    }));
    out.extend(guarded("9", || {
        let start = Instant::now();
        let opts = QuadratureOptions::default();
        let p = reference_waveguide(0.05)?;
        let src = Point::new(0.8, 0.0);
        let pts = [
            Point::new(0.6, 1.5),
            Point::new(-0.6, 1.5),
            Point::new(1.7, -2.0),
            Point::new(-1.7, -2.0),
        ];
        let g = green_on_points(&p, 2.2, src, &pts, &opts)?;
        let mut worst: f64 = 0.0;
        for pair in g.chunks_exact(2) {
            worst =
                worst.max((pair[0].sym_cont - pair[1].sym_cont).norm() / pair[0].sym_cont.norm());
            worst = worst
                .max((pair[0].anti_cont + pair[1].anti_cont).norm() / pair[0].anti_cont.norm());
        }
        Ok(vec![line(
            "9",
            worst < 1e-10,
            format!("parity of continuous parts: max rel. defect {worst:.1e}"),
            start,
        )])
    }));
    out.extend(guarded("9", || {
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let (x, z, x0) = (
                rng.random_range(-3.0..3.0),
                rng.random_range(0.5..5.0),
                rng.random_range(0.1..3.0),
            );
            let k = rng.random_range(0.3..5.0);
            let (s, a) = h_images(x, z, x0, 0.0, k, 1.0)?;
            let h = h_free(x, z, x0, 0.0, k, 1.0)?;
            worst = worst.max((s + a - h).norm() / h.norm());
        }
        Ok(vec![line(
            "9",
            worst < 1e-14,
            format!("H_s + H_a = H: max rel. defect {worst:.1e}"),
            start,
        )])
    }));
    out.extend(guarded("9", || {
        let start = Instant::now();
        let opts = QuadratureOptions {
            tolerance: 1e-12,
            ..QuadratureOptions::default()
        };
        let p = reference_waveguide(0.05)?;
        let k = 1.3;
        let src = Point::new(1.0, 0.0);
        let eta = 0.01;
        let mut worst: f64 = 0.0;
        for c in [
            Point::new(0.7, 1.5),
            Point::new(-0.9, 2.0),
            Point::new(2.0, -1.2),
            Point::new(0.3, 3.0),
        ] {
            let stencil = [
                c,
                Point::new(c.x + eta, c.z),
                Point::new(c.x - eta, c.z),
                Point::new(c.x, c.z + eta),
                Point::new(c.x, c.z - eta),
            ];
            let g: Vec<Complex64> = green_on_points(&p, k, src, &stencil, &opts)?
                .iter()
                .map(|g| g.total)
                .collect();
            let lap = (g[1] + g[2] + g[3] + g[4] - 4.0 * g[0]) / (eta * eta);
            let res = lap + k * k * p.n_cl * p.n_cl * g[0];
            worst = worst.max(res.norm() / g[0].norm());
        }
        Ok(vec![line(
            "9",
            worst <= 1e-4,
            format!("Helmholtz residual off core and source: max {worst:.1e} |G| (<= 1e-4)"),
            start,
        )])
    }));
    out.extend(guarded("9", || {
        let start = Instant::now();
        let clean: Vec<Complex64> = (0..20000)
            .map(|i| Complex64::new(1.0 + (i % 7) as f64, -0.5 - (i % 5) as f64))
            .collect();
        let model = NoiseModel::new(0.05, NoiseScale::PerPoint)?;
        let noisy = model.apply(&clean, 1.7, 5);
        let z: Vec<f64> = noisy
            .iter()
            .zip(&clean)
            .flat_map(|(n, c)| {
                [
                    (n.re - c.re) / (0.05 * c.re.abs()),
                    (n.im - c.im) / (0.05 * c.im.abs()),
                ]
            })
            .collect();
        let m = z.iter().sum::<f64>() / z.len() as f64;
        let sd = (z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (z.len() - 1) as f64).sqrt();
        let ok = m.abs() < 0.03 && (sd - 1.0).abs() < 0.03;
        Ok(vec![line(
            "9",
            ok,
            format!("noise statistics: standardized mean {m:.4}, sd {sd:.4}"),
            start,
        )])
    }));
    out.extend(guarded("9", || {
        let start = Instant::now();
        let r = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &NelderMeadOptions::default(),
        );
        let descent = r.history.windows(2).all(|w| w[1] <= w[0]);
        let ok = descent && (r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3;
        Ok(vec![line(
            "9",
            ok,
            format!("optimizer descent: best value non-increasing over {} iterations, minimum at ({:.5}, {:.5})", r.iterations, r.x[0], r.x[1]),
            start,
        )])
    }));
    out.extend(guarded("9", || {
        let start = Instant::now();
        let a = reference_probe(0.05, 0.03, 42)?;
        let b = reference_probe(0.05, 0.03, 42)?;
        let c = a.with_seed(43);
        let ma = a.measure(2.3)?;
        let mb = b.measure(2.3)?;
        let mc = c.measure(2.3)?;
        let ok = ma.values == mb.values && ma.values != mc.values;
        Ok(vec![line(
            "9",
            ok,
            "determinism: equal seeds give identical data, different seeds differ".into(),
            start,
        )])
    }));
    out
}

/// All criteria in order.
/// Criterion runners in order; entry `i` checks criterion `i + 1`.
pub const CRITERIA: [fn() -> Vec<CheckLine>; 9] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
];

/// Runs the listed criteria (numbered from 1); unknown numbers are skipped.
pub fn run(ids: &[usize]) -> Vec<CheckLine> {
    ids.iter()
        .filter_map(|&i| i.checked_sub(1).and_then(|j| CRITERIA.get(j)))
        .flat_map(|f| f())
        .collect()
}

pub fn run_all() -> Vec<CheckLine> {
    CRITERIA.iter().flat_map(|f| f()).collect()
}
