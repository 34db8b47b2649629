use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use thinwg_core::geometry::Point;
use thinwg_core::homogeneous::{asymptotic_on_points, Order};
use thinwg_core::inversion::pipeline::STAGE_SCAN;
use thinwg_core::inversion::{
    band_membership, calibrate_c, run_pipeline, step1_scan, step3_peak_width_with, InversionReport,
    ResonanceScan,
};
use thinwg_core::selfcheck::{self, CheckLine};
use thinwg_core::synth::{self, RecordingProbe};
use thinwg_core::waveguide::green_on_points;
use thinwg_core::{DatasetProbe, Error, FieldProbe, RunConfig, SimulatedProbe, Truth};

use crate::cli::{
    CalibrateArgs, Cli, Command, DataArgs, GlobalArgs, GreenArgs, OrderArg, SelftestArgs, SynthArgs,
};

pub fn run(cli: Cli) -> Result<ExitCode> {
    init_threads()?;
    let ctx = Run::new(&cli.global)?;
    match cli.command {
        Command::Green(a) => green(&ctx, &a),
        Command::Scan(a) => scan(&ctx, &a),
        Command::Synth(a) => synth(&ctx, &a),
        Command::Invert(a) => invert(&ctx, &a),
        Command::Calibrate(a) => calibrate(&ctx, &a),
        Command::Selftest(a) => selftest(&ctx, &a),
    }
}

/// Caps the rayon pool at `THINWG_THREADS` when set.
fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("THINWG_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        Error::Config(format!("THINWG_THREADS = {v:?} is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

/// Effective configuration plus output settings shared by every command.
struct Run {
    cfg: RunConfig,
    quiet: bool,
}

impl Run {
    fn new(g: &GlobalArgs) -> Result<Self> {
        let mut cfg = match &g.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(s) = g.seed {
            cfg.noise.seed = s;
        }
        if let Some(p) = g.noise {
            cfg.noise.pct = p;
        }
        if let Some(d) = &g.out {
            cfg.output.dir = d.clone();
        }
        if let Some(k) = g.kmin {
            cfg.inversion.k_min = k;
        }
        if let Some(k) = g.kmax {
            cfg.inversion.k_max = k;
        }
        if let Some(n) = g.ksteps {
            cfg.inversion.coarse_steps = n;
        }
        cfg.validate()?;
        Ok(Self {
            cfg,
            quiet: g.quiet,
        })
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn output(&self, name: &str) -> Result<PathBuf> {
        let dir = &self.cfg.output.dir;
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        Ok(dir.join(name))
    }

    fn simulated(&self) -> Result<SimulatedProbe> {
        let c = &self.cfg;
        Ok(SimulatedProbe::new(
            c.waveguide()?,
            c.pose()?,
            &c.screen(),
            c.noise()?,
            c.noise.seed,
            c.quadrature,
        )?)
    }

    fn tolerance(&self, explicit: Option<f64>) -> f64 {
        explicit.unwrap_or(0.5 * self.cfg.inversion.coarse_step())
    }
}

/// Probe, cladding index and (for synthetic data) the true parameters.
struct Source {
    probe: Box<dyn FieldProbe>,
    n_cl: f64,
    truth: Option<Truth>,
}

fn source(ctx: &Run, data: &DataArgs) -> Result<Source> {
    match &data.data {
        Some(path) => {
            let set = synth::load(path)?;
            let n_cl = set.meta.n_cl.unwrap_or(ctx.cfg.waveguide.n_cl);
            let truth = set.meta.truth;
            let probe = DatasetProbe::new(set, ctx.tolerance(data.tolerance))?;
            Ok(Source {
                probe: Box::new(probe),
                n_cl,
                truth,
            })
        }
        None => {
            let probe = ctx.simulated()?;
            let truth = Some(probe.truth());
            Ok(Source {
                probe: Box::new(probe),
                n_cl: ctx.cfg.waveguide.n_cl,
                truth,
            })
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn green(ctx: &Run, a: &GreenArgs) -> Result<ExitCode> {
    // false for NaN bounds as well as reversed ones
    let ordered = |lo: f64, hi: f64| lo <= hi;
    if a.nx == 0 || a.nz == 0 || !ordered(a.x_min, a.x_max) || !ordered(a.z_min, a.z_max) {
        return Err(Error::Config("empty grid".into()).into());
    }
    let params = ctx.cfg.waveguide()?;
    let source = ctx.cfg.pose()?.source();
    let points: Vec<Point> = grid(a.z_min, a.z_max, a.nz)
        .into_iter()
        .flat_map(|z| {
            grid(a.x_min, a.x_max, a.nx)
                .into_iter()
                .map(move |x| Point::new(x, z))
        })
        .collect();
    if let Some(p) = points.iter().find(|p| p.distance(&source) < 1e-12) {
        return Err(Error::Geometry(format!(
            "grid point ({}, {}) coincides with the source",
            p.x, p.z
        ))
        .into());
    }
    let opts = &ctx.cfg.quadrature;
    let g = green_on_points(&params, a.k, source, &points, opts)?;
    // the asymptote describes the field outside the core only
    let outside: Vec<usize> = (0..points.len())
        .filter(|&i| points[i].x.abs() > params.h)
        .collect();
    let order = match a.order {
        OrderArg::Zero => Order::Zero,
        OrderArg::One => Order::One,
    };
    let pts: Vec<Point> = outside.iter().map(|&i| points[i]).collect();
    let asym = asymptotic_on_points(&params, a.k, source, &pts, order, opts)?;
    let mut err = vec![None; points.len()];
    for (&i, v) in outside.iter().zip(&asym) {
        err[i] = Some((g[i].total - v).norm());
    }
    let path = ctx.output("green.csv")?;
    let mut w = csv_writer(&path)?;
    w.write_record(["x", "z", "re_G", "im_G", "abs_G", "abs_err"])?;
    for ((p, gp), e) in points.iter().zip(&g).zip(&err) {
        let v = gp.total;
        w.write_record([
            p.x.to_string(),
            p.z.to_string(),
            v.re.to_string(),
            v.im.to_string(),
            v.norm().to_string(),
            e.map(|e| e.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    let worst = err.iter().flatten().copied().fold(0.0, f64::max);
    ctx.say(format!(
        "k = {}: {} points, max |G - asymptote| = {worst:.3e}; wrote {}",
        a.k,
        points.len(),
        path.display()
    ));
    Ok(ExitCode::SUCCESS)
}

fn scan(ctx: &Run, a: &DataArgs) -> Result<ExitCode> {
    let src = source(ctx, a)?;
    let inv = &ctx.cfg.inversion;
    let scan = step1_scan(src.probe.as_ref(), src.n_cl, inv).map_err(|e| e.in_stage(STAGE_SCAN))?;
    let in_b = band_membership(&scan, inv.beta, inv.width_extrema)?;
    let path = ctx.output("scan.csv")?;
    write_scan(&path, &scan, &in_b)?;
    ctx.say(format!(
        "{} frequencies, median derivative norm {:.3e}, threshold {:.3e}",
        scan.samples.len(),
        scan.median_derivative,
        scan.threshold
    ));
    for p in &scan.peaks {
        let delta = step3_peak_width_with(&scan, inv.beta, p.p, inv.width_extrema)
            .map(|d| format!("{d:.4e}"))
            .unwrap_or_else(|e| format!("n/a ({e})"));
        ctx.say(format!(
            "peak {}: k_hat = {:.6}, E_min = {:.4e}, delta = {delta}{}",
            p.p,
            p.k_hat,
            p.e_min,
            if p.prominent {
                ""
            } else {
                " (below threshold)"
            }
        ));
    }
    ctx.say(format!("wrote {}", path.display()));
    Ok(ExitCode::SUCCESS)
}

fn write_scan(path: &Path, scan: &ResonanceScan, in_b: &[bool]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["k", "E", "deriv_norm", "in_B"])?;
    // derivative norm of the interval starting at each coarse point
    let mut coarse = scan.coarse_k.iter().zip(&scan.derivative_norms).peekable();
    for (&(k, e), &b) in scan.samples.iter().zip(in_b) {
        while coarse.peek().is_some_and(|(c, _)| **c < k) {
            coarse.next();
        }
        let d = match coarse.peek() {
            Some((c, d)) if **c == k => d.to_string(),
            _ => String::new(),
        };
        w.write_record([k.to_string(), e.to_string(), d, u8::from(b).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn synth(ctx: &Run, a: &SynthArgs) -> Result<ExitCode> {
    let probe = ctx.simulated()?;
    let c = &ctx.cfg;
    let set = if a.grid {
        let inv = &c.inversion;
        let ks = grid(inv.k_min, inv.k_max, inv.coarse_steps + 1);
        synth::simulate(
            &c.waveguide()?,
            &c.pose()?,
            &c.screen(),
            &ks,
            c.noise()?,
            c.noise.seed,
            &c.quadrature,
        )?
    } else {
        // record every frequency the identification asks for
        let rec = RecordingProbe::new(&probe);
        let report = run_pipeline(&rec, c.waveguide.n_cl, &c.inversion, None)?;
        if let Some(f) = report.first_failure() {
            log::warn!("acquisition run: stage {} failed: {}", f.stage, f.message);
        }
        rec.into_measurement_set(probe.meta())
    };
    let path = ctx.output("dataset.csv")?;
    synth::save(&set, &path)?;
    ctx.say(format!(
        "{} frequencies x {} screen points, noise {}% (seed {}); wrote {} and {}",
        set.frequencies.len(),
        set.samples.len(),
        c.noise.pct,
        c.noise.seed,
        path.display(),
        synth::sidecar_path(&path).display()
    ));
    Ok(ExitCode::SUCCESS)
}

fn invert(ctx: &Run, a: &DataArgs) -> Result<ExitCode> {
    let src = source(ctx, a)?;
    let report = run_pipeline(
        src.probe.as_ref(),
        src.n_cl,
        &ctx.cfg.inversion,
        src.truth.as_ref(),
    )?;
    let path = ctx.output("report.json")?;
    write_json(&path, &report)?;
    summarize(ctx, &report);
    ctx.say(format!("wrote {}", path.display()));
    for w in &report.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    for f in &report.diagnostics.failures {
        eprintln!("stage {} failed: {}", f.stage, f.message);
    }
    Ok(if report.is_complete() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn summarize(ctx: &Run, r: &InversionReport) {
    let show = |name: &str, v: Option<f64>, err: Option<f64>| {
        let v = v.map_or("-".to_string(), |v| format!("{v:.6}"));
        let e = err.map_or(String::new(), |e| format!("  ({:.3}%)", 100.0 * e));
        ctx.say(format!("{name:<10} {v}{e}"));
    };
    let e = r.errors_rel.unwrap_or_default();
    show("khat1", r.khat1, e.khat1);
    show("nbar", r.nbar_hat, e.nbar);
    show("x0", r.x0_hat, e.x0);
    show("alpha", r.alpha_hat, e.alpha);
    show("h (i)", r.h_hat_lin, e.h_lin);
    show("h (ii)", r.h_hat_peak, e.h_peak);
    show("n_h (i)", r.nh_hat.lin, e.nh_lin);
    show("n_h (ii)", r.nh_hat.peak, e.nh_peak);
}

#[derive(Serialize)]
struct CalibrationRun {
    dataset: PathBuf,
    h: f64,
    khat1: f64,
    delta_1: f64,
}

#[derive(Serialize)]
struct Calibration {
    peak_constant: f64,
    beta: f64,
    runs: Vec<CalibrationRun>,
}

fn calibrate(ctx: &Run, a: &CalibrateArgs) -> Result<ExitCode> {
    if !a.h.is_empty() && a.h.len() != a.datasets.len() {
        return Err(Error::Config(format!(
            "{} values of h for {} datasets",
            a.h.len(),
            a.datasets.len()
        ))
        .into());
    }
    let inv = &ctx.cfg.inversion;
    let mut runs = Vec::new();
    for (i, path) in a.datasets.iter().enumerate() {
        let set = synth::load(path)?;
        let h = match a.h.get(i) {
            Some(&h) => h,
            None => set.meta.truth.map(|t| t.waveguide.h).ok_or_else(|| {
                anyhow!(Error::Config(format!(
                    "{}: no known h (pass --h)",
                    path.display()
                )))
            })?,
        };
        let n_cl = set.meta.n_cl.unwrap_or(ctx.cfg.waveguide.n_cl);
        let probe = DatasetProbe::new(set, ctx.tolerance(a.tolerance))?;
        let scan = step1_scan(&probe, n_cl, inv)
            .map_err(|e| e.in_stage(STAGE_SCAN))
            .with_context(|| path.display().to_string())?;
        let delta_1 = step3_peak_width_with(&scan, inv.beta, 1, inv.width_extrema)
            .with_context(|| path.display().to_string())?;
        ctx.say(format!(
            "{}: h = {h}, delta_1 = {delta_1:.4e}",
            path.display()
        ));
        runs.push(CalibrationRun {
            dataset: path.clone(),
            h,
            khat1: scan.khat1().expect("scan has a peak"),
            delta_1,
        });
    }
    let pairs: Vec<(f64, f64)> = runs.iter().map(|r| (r.h, r.delta_1)).collect();
    let c = calibrate_c(&pairs)?;
    let path = ctx.output("calibration.json")?;
    write_json(
        &path,
        &Calibration {
            peak_constant: c,
            beta: inv.beta,
            runs,
        },
    )?;
    ctx.say(format!("C = {c:.5}; wrote {}", path.display()));
    Ok(ExitCode::SUCCESS)
}

/// Top-level keys of the inversion report.
const REPORT_KEYS: [&str; 9] = [
    "khat1",
    "nbar_hat",
    "x0_hat",
    "alpha_hat",
    "h_hat_lin",
    "h_hat_peak",
    "nh_hat",
    "errors_rel",
    "diagnostics",
];

/// Serializes a cheap report and checks its key set.
fn schema_check(ctx: &Run) -> CheckLine {
    let start = std::time::Instant::now();
    let result = (|| -> Result<Vec<String>> {
        let mut inv = ctx.cfg.inversion.clone();
        // a band without resonances keeps this fast and exercises the failure path
        inv.k_min = 2.2;
        inv.k_max = 2.8;
        let probe = ctx.simulated()?;
        let report = run_pipeline(&probe, ctx.cfg.waveguide.n_cl, &inv, Some(&probe.truth()))?;
        let v = serde_json::to_value(&report)?;
        let obj = v
            .as_object()
            .ok_or_else(|| anyhow!("report is not an object"))?;
        let mut problems: Vec<String> = REPORT_KEYS
            .iter()
            .filter(|k| !obj.contains_key(**k))
            .map(|k| format!("missing {k}"))
            .collect();
        problems.extend(
            obj.keys()
                .filter(|k| !REPORT_KEYS.contains(&k.as_str()))
                .map(|k| format!("unexpected {k}")),
        );
        for k in ["lin", "peak"] {
            if obj.get("nh_hat").and_then(|n| n.get(k)).is_none() {
                problems.push(format!("missing nh_hat.{k}"));
            }
        }
        for k in ["config", "failures", "warnings", "peaks"] {
            if obj.get("diagnostics").and_then(|d| d.get(k)).is_none() {
                problems.push(format!("missing diagnostics.{k}"));
            }
        }
        Ok(problems)
    })();
    let (passed, detail) = match result {
        Ok(p) if p.is_empty() => (
            true,
            "report JSON has the fixed key set (on a resonance-free band)".to_string(),
        ),
        Ok(p) => (false, p.join(", ")),
        Err(e) => (false, format!("{e:#}")),
    };
    CheckLine {
        id: "S".into(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn selftest(ctx: &Run, a: &SelftestArgs) -> Result<ExitCode> {
    let ids: Vec<usize> = if a.criteria.is_empty() {
        (1..=selfcheck::CRITERIA.len()).collect()
    } else {
        a.criteria.clone()
    };
    if let Some(bad) = ids
        .iter()
        .find(|i| !(1..=selfcheck::CRITERIA.len()).contains(*i))
    {
        return Err(Error::Config(format!("no criterion {bad}")).into());
    }
    let mut lines = Vec::new();
    for id in ids {
        for l in selfcheck::run(&[id]) {
            println!("{l}");
            lines.push(l);
        }
    }
    let s = schema_check(ctx);
    println!("{s}");
    lines.push(s);
    let failed = lines.iter().filter(|l| !l.passed).count();
    println!("{} checks, {} failed", lines.len(), failed);
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
