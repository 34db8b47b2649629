//! Synthetic screen measurements, the noise model, dataset files and field probes.
//!
//! A [`FieldProbe`] hands out the measured field on the screen at a requested
//! frequency. [`SimulatedProbe`] evaluates the exact Green function on demand,
//! [`DatasetProbe`] looks frequencies up in a stored [`MeasurementSet`] and
//! [`RecordingProbe`] keeps every answer so an adaptive acquisition can be
//! written out and replayed bit for bit.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sample_screen, transform, Pose, Screen, ScreenSample};
use crate::waveguide::{green_on_points, QuadratureOptions, WaveguideParams};
use crate::Point;

/// How the noise standard deviation is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScale {
    /// `sigma = level |Re G_i|` and `level |Im G_i|` at every sample.
    #[default]
    PerPoint,
    /// `sigma = level max_i |Re G_i|` (resp. `Im`) over the screen at each frequency.
    ScreenWide,
}

/// Proportional Gaussian noise, one ChaCha8 stream per frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Relative level, e.g. `0.03` for 3 %.
    pub level: f64,
    pub scale: NoiseScale,
}

impl NoiseModel {
    pub fn new(level: f64, scale: NoiseScale) -> Result<Self> {
        if !(level >= 0.0) || !level.is_finite() {
            return Err(Error::Config(format!(
                "noise level {level} must be finite and >= 0"
            )));
        }
        Ok(Self { level, scale })
    }

    pub fn none() -> Self {
        Self {
            level: 0.0,
            scale: NoiseScale::PerPoint,
        }
    }

    /// Noisy copy of `clean`. The generator is seeded with `seed` and its
    /// stream set to the bit pattern of `k`, so the result depends only on
    /// `(seed, k, clean)`.
    pub fn apply(&self, clean: &[Complex64], k: f64, seed: u64) -> Vec<Complex64> {
        if self.level == 0.0 {
            return clean.to_vec();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k.to_bits());
        let (sr, si) = match self.scale {
            NoiseScale::PerPoint => (None, None),
            NoiseScale::ScreenWide => (
                Some(clean.iter().map(|v| v.re.abs()).fold(0.0, f64::max)),
                Some(clean.iter().map(|v| v.im.abs()).fold(0.0, f64::max)),
            ),
        };
        clean
            .iter()
            .map(|v| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                let re = v.re + self.level * sr.unwrap_or(v.re.abs()) * a;
                let im = v.im + self.level * si.unwrap_or(v.im.abs()) * b;
                Complex64::new(re, im)
            })
            .collect()
    }
}

/// True parameters behind a synthetic dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub waveguide: WaveguideParams,
    pub pose: Pose,
}

/// Everything in a dataset besides the field values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub noise: NoiseModel,
    pub seed: u64,
    /// Cladding index, known a priori in the identification problem.
    pub n_cl: Option<f64>,
    pub truth: Option<Truth>,
}

/// Field samples on the screen at a set of frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    /// Strictly increasing.
    pub frequencies: Vec<f64>,
    /// Screen samples in the measurement frame.
    pub samples: Vec<ScreenSample>,
    /// `values[f][i]`: field at `frequencies[f]`, sample `i`.
    pub values: Vec<Vec<Complex64>>,
    pub meta: DatasetMeta,
}

impl MeasurementSet {
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.frequencies.len() {
            return Err(Error::Config(format!(
                "{} value rows for {} frequencies",
                self.values.len(),
                self.frequencies.len()
            )));
        }
        if let Some(row) = self.values.iter().find(|r| r.len() != self.samples.len()) {
            return Err(Error::Config(format!(
                "row of {} values for {} screen samples",
                row.len(),
                self.samples.len()
            )));
        }
        if self.frequencies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(
                "frequencies must be strictly increasing".into(),
            ));
        }
        Ok(())
    }

    /// Index of the frequency nearest to `k`.
    pub fn nearest(&self, k: f64) -> Option<usize> {
        let f = &self.frequencies;
        if f.is_empty() {
            return None;
        }
        let i = f.partition_point(|&v| v < k);
        if i == 0 {
            Some(0)
        } else if i == f.len() {
            Some(f.len() - 1)
        } else if (f[i] - k).abs() < (k - f[i - 1]).abs() {
            Some(i)
        } else {
            Some(i - 1)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    format: String,
    frequencies: usize,
    points: usize,
    #[serde(flatten)]
    meta: DatasetMeta,
}

const FORMAT_TAG: &str = "thinwg-dataset-v1";

/// Sidecar path: the dataset path with extension `json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes `path` (CSV `k,t,xp,zp,w,re,im`) and its JSON sidecar.
pub fn save(set: &MeasurementSet, path: &Path) -> Result<()> {
    set.validate()?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| Error::schema(path, e.to_string());
    w.write_record(["k", "t", "xp", "zp", "w", "re", "im"])
        .map_err(csv_err)?;
    // {:e} with 16 fractional digits = 17 significant digits, exact round-trip
    let f = |v: f64| format!("{v:.16e}");
    for (k, row) in set.frequencies.iter().zip(&set.values) {
        for (s, v) in set.samples.iter().zip(row) {
            w.write_record([
                f(*k),
                f(s.t),
                f(s.point.x),
                f(s.point.z),
                f(s.weight),
                f(v.re),
                f(v.im),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let meta = Sidecar {
        format: FORMAT_TAG.into(),
        frequencies: set.frequencies.len(),
        points: set.samples.len(),
        meta: set.meta.clone(),
    };
    let mut out = BufWriter::new(File::create(&side).map_err(|e| Error::io(&side, e))?);
    serde_json::to_writer_pretty(&mut out, &meta)
        .map_err(|e| Error::schema(&side, e.to_string()))?;
    out.flush().map_err(|e| Error::io(&side, e))?;
    Ok(())
}

/// Reads a dataset written by [`save`] and checks its shape against the sidecar.
pub fn load(path: &Path) -> Result<MeasurementSet> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: Sidecar =
        serde_json::from_str(&text).map_err(|e| Error::schema(&side, e.to_string()))?;
    if meta.format != FORMAT_TAG {
        return Err(Error::schema(
            &side,
            format!("unknown format tag {:?}", meta.format),
        ));
    }
    // save always terminates the last row; a missing newline means a cut file
    if !body.ends_with('\n') {
        return Err(Error::schema(
            path,
            "file does not end with a newline (truncated?)",
        ));
    }
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::schema(path, e.to_string()))?;
    let expected = ["k", "t", "xp", "zp", "w", "re", "im"];
    if headers.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(Error::schema(
            path,
            format!("header {headers:?}, expected {expected:?}"),
        ));
    }
    let mut frequencies: Vec<f64> = Vec::new();
    let mut values: Vec<Vec<Complex64>> = Vec::new();
    let mut samples: Vec<ScreenSample> = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::schema(path, e.to_string()))?;
        if rec.len() != 7 {
            return Err(Error::schema(
                path,
                format!("row {}: {} fields", line + 2, rec.len()),
            ));
        }
        let mut v = [0.0; 7];
        for (j, field) in rec.iter().enumerate() {
            v[j] = field.trim().parse().map_err(|_| {
                Error::schema(path, format!("row {}: bad number {field:?}", line + 2))
            })?;
        }
        let [k, t, xp, zp, w, re, im] = v;
        if frequencies.last() != Some(&k) {
            if let Some(&prev) = frequencies.last() {
                if !(k > prev) {
                    return Err(Error::schema(
                        path,
                        format!("row {}: frequencies not increasing", line + 2),
                    ));
                }
            }
            frequencies.push(k);
            values.push(Vec::with_capacity(meta.points));
        }
        let row = values.last_mut().expect("row pushed above");
        let sample = ScreenSample {
            t,
            point: Point::new(xp, zp),
            weight: w,
        };
        if frequencies.len() == 1 {
            samples.push(sample);
        } else {
            let i = row.len();
            if samples.get(i) != Some(&sample) {
                return Err(Error::schema(
                    path,
                    format!("row {}: screen sample differs from first block", line + 2),
                ));
            }
        }
        row.push(Complex64::new(re, im));
    }
    if frequencies.len() != meta.frequencies || samples.len() != meta.points {
        return Err(Error::schema(
            path,
            format!(
                "shape {}x{} does not match sidecar {}x{}",
                frequencies.len(),
                samples.len(),
                meta.frequencies,
                meta.points
            ),
        ));
    }
    if let Some(r) = values.iter().position(|r| r.len() != samples.len()) {
        return Err(Error::schema(
            path,
            format!("frequency block {r} has {} rows", values[r].len()),
        ));
    }
    Ok(MeasurementSet {
        frequencies,
        samples,
        values,
        meta: meta.meta,
    })
}

/// Field on the screen at the frequency actually used.
#[derive(Debug, Clone)]
pub struct Measured {
    pub k: f64,
    pub values: Arc<Vec<Complex64>>,
}

/// Source of screen measurements.
pub trait FieldProbe: Sync {
    /// Screen samples in the measurement frame.
    fn samples(&self) -> &[ScreenSample];

    /// Field at (or near, for finite datasets) `k`.
    fn measure(&self, k: f64) -> Result<Measured>;

    /// Frequencies that will actually be measured for a requested grid,
    /// strictly increasing and without duplicates.
    fn resolve_grid(&self, ks: &[f64]) -> Result<Vec<f64>> {
        Ok(ks.to_vec())
    }

    fn measure_many(&self, ks: &[f64]) -> Result<Vec<Measured>> {
        ks.par_iter().map(|&k| self.measure(k)).collect()
    }
}

/// Exact forward model plus noise, evaluated on demand.
///
/// Clean fields are cached per frequency; clones made with
/// [`SimulatedProbe::with_seed`] share that cache.
#[derive(Debug, Clone)]
pub struct SimulatedProbe {
    params: WaveguideParams,
    pose: Pose,
    samples: Vec<ScreenSample>,
    core_points: Vec<Point>,
    noise: NoiseModel,
    seed: u64,
    quad: QuadratureOptions,
    clean: Arc<Mutex<HashMap<u64, Arc<Vec<Complex64>>>>>,
}

impl SimulatedProbe {
    pub fn new(
        params: WaveguideParams,
        pose: Pose,
        screen: &Screen,
        noise: NoiseModel,
        seed: u64,
        quad: QuadratureOptions,
    ) -> Result<Self> {
        params.validate()?;
        let samples = sample_screen(screen)?;
        let core_points: Vec<Point> = samples.iter().map(|s| transform(&pose, s.point)).collect();
        if let Some(p) = core_points.iter().find(|p| !(p.x > params.h)) {
            return Err(Error::Geometry(format!(
                "screen point {p:?} (core frame) is not above the core |x| > h = {}",
                params.h
            )));
        }
        if core_points.iter().any(|p| p.z == 0.0) {
            return Err(Error::Geometry(
                "screen point level with the source (z = 0)".into(),
            ));
        }
        Ok(Self {
            params,
            pose,
            samples,
            core_points,
            noise,
            seed,
            quad,
            clean: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    /// Same configuration and clean-field cache, different noise seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Same configuration and clean-field cache, different noise model.
    pub fn with_noise(&self, noise: NoiseModel) -> Self {
        Self {
            noise,
            ..self.clone()
        }
    }

    pub fn truth(&self) -> Truth {
        Truth {
            waveguide: self.params,
            pose: self.pose,
        }
    }

    pub fn meta(&self) -> DatasetMeta {
        DatasetMeta {
            noise: self.noise,
            seed: self.seed,
            n_cl: Some(self.params.n_cl),
            truth: Some(self.truth()),
        }
    }

    /// Noise-free field `G(T(p_i); x0, 0; k)`.
    pub fn clean_field(&self, k: f64) -> Result<Arc<Vec<Complex64>>> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::domain("simulate", format!("frequency {k}")));
        }
        if let Some(v) = self
            .clean
            .lock()
            .expect("field cache poisoned")
            .get(&k.to_bits())
        {
            return Ok(Arc::clone(v));
        }
        let parts = green_on_points(
            &self.params,
            k,
            self.pose.source(),
            &self.core_points,
            &self.quad,
        )?;
        let v: Arc<Vec<Complex64>> = Arc::new(parts.into_iter().map(|g| g.total).collect());
        self.clean
            .lock()
            .expect("field cache poisoned")
            .insert(k.to_bits(), Arc::clone(&v));
        Ok(v)
    }
}

impl FieldProbe for SimulatedProbe {
    fn samples(&self) -> &[ScreenSample] {
        &self.samples
    }

    fn measure(&self, k: f64) -> Result<Measured> {
        let clean = self.clean_field(k)?;
        let values = if self.noise.level == 0.0 {
            clean
        } else {
            Arc::new(self.noise.apply(&clean, k, self.seed))
        };
        Ok(Measured { k, values })
    }
}

/// Simulates a full dataset on the given frequencies.
pub fn simulate(
    params: &WaveguideParams,
    pose: &Pose,
    screen: &Screen,
    freqs: &[f64],
    noise: NoiseModel,
    seed: u64,
    quad: &QuadratureOptions,
) -> Result<MeasurementSet> {
    if freqs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(
            "frequencies must be strictly increasing".into(),
        ));
    }
    let probe = SimulatedProbe::new(*params, *pose, screen, noise, seed, *quad)?;
    let measured = probe.measure_many(freqs)?;
    Ok(MeasurementSet {
        frequencies: freqs.to_vec(),
        samples: probe.samples.clone(),
        values: measured
            .into_iter()
            .map(|m| m.values.as_ref().clone())
            .collect(),
        meta: probe.meta(),
    })
}

/// Nearest-frequency lookup in a stored dataset.
#[derive(Debug, Clone)]
pub struct DatasetProbe {
    set: MeasurementSet,
    rows: Vec<Arc<Vec<Complex64>>>,
    tolerance: f64,
}

impl DatasetProbe {
    /// `tolerance`: largest accepted `|k_requested - k_available|`.
    pub fn new(set: MeasurementSet, tolerance: f64) -> Result<Self> {
        set.validate()?;
        if set.frequencies.is_empty() {
            return Err(Error::Config("dataset has no frequencies".into()));
        }
        let rows = set.values.iter().map(|r| Arc::new(r.clone())).collect();
        Ok(Self {
            set,
            rows,
            tolerance,
        })
    }

    pub fn set(&self) -> &MeasurementSet {
        &self.set
    }

    fn lookup(&self, k: f64) -> Result<usize> {
        let i = self.set.nearest(k).expect("non-empty dataset");
        let f = self.set.frequencies[i];
        if (f - k).abs() > self.tolerance.max(1e-12 * k.abs()) {
            return Err(Error::MissingFrequency { k, nearest: f });
        }
        Ok(i)
    }
}

impl FieldProbe for DatasetProbe {
    fn samples(&self) -> &[ScreenSample] {
        &self.set.samples
    }

    fn measure(&self, k: f64) -> Result<Measured> {
        let i = self.lookup(k)?;
        Ok(Measured {
            k: self.set.frequencies[i],
            values: Arc::clone(&self.rows[i]),
        })
    }

    fn resolve_grid(&self, ks: &[f64]) -> Result<Vec<f64>> {
        let mut out: Vec<f64> = Vec::with_capacity(ks.len());
        for &k in ks {
            if let Ok(i) = self.lookup(k) {
                let f = self.set.frequencies[i];
                if out.last() != Some(&f) {
                    out.push(f);
                }
            }
        }
        out.dedup();
        Ok(out)
    }
}

/// Wraps a probe and keeps every measurement it hands out.
pub struct RecordingProbe<'a, P: FieldProbe> {
    inner: &'a P,
    log: Mutex<BTreeMap<u64, Arc<Vec<Complex64>>>>,
}

impl<'a, P: FieldProbe> RecordingProbe<'a, P> {
    pub fn new(inner: &'a P) -> Self {
        Self {
            inner,
            log: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.log.lock().expect("recording poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All recorded frequencies as a dataset.
    pub fn into_measurement_set(self, meta: DatasetMeta) -> MeasurementSet {
        let samples = self.inner.samples().to_vec();
        let log = self.log.into_inner().expect("recording poisoned");
        // positive f64 bit patterns sort like the values
        let mut frequencies = Vec::with_capacity(log.len());
        let mut values = Vec::with_capacity(log.len());
        for (bits, v) in log {
            frequencies.push(f64::from_bits(bits));
            values.push(v.as_ref().clone());
        }
        MeasurementSet {
            frequencies,
            samples,
            values,
            meta,
        }
    }
}

impl<P: FieldProbe> FieldProbe for RecordingProbe<'_, P> {
    fn samples(&self) -> &[ScreenSample] {
        self.inner.samples()
    }

    fn measure(&self, k: f64) -> Result<Measured> {
        let m = self.inner.measure(k)?;
        self.log
            .lock()
            .expect("recording poisoned")
            .insert(m.k.to_bits(), Arc::clone(&m.values));
        Ok(m)
    }

    fn resolve_grid(&self, ks: &[f64]) -> Result<Vec<f64>> {
        self.inner.resolve_grid(ks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn probe(noise: f64) -> SimulatedProbe {
        let p = WaveguideParams::new(0.005, FRAC_PI_2, 1.0).unwrap();
        let pose = Pose::new(1.0, PI / 20.0).unwrap();
        let screen = Screen {
            samples_per_segment: 8,
            ..Screen::default()
        };
        SimulatedProbe::new(
            p,
            pose,
            &screen,
            NoiseModel::new(noise, NoiseScale::PerPoint).unwrap(),
            7,
            QuadratureOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn noiseless_equals_direct_evaluation() {
        let pr = probe(0.0);
        let m = pr.measure(2.5).unwrap();
        let pts: Vec<Point> = pr
            .samples()
            .iter()
            .map(|s| transform(&pr.pose, s.point))
            .collect();
        let g = green_on_points(
            &pr.params,
            2.5,
            pr.pose.source(),
            &pts,
            &QuadratureOptions::default(),
        )
        .unwrap();
        for (a, b) in m.values.iter().zip(g) {
            assert_eq!(*a, b.total);
        }
    }

    #[test]
    fn same_seed_same_data_and_seed_sharing_cache() {
        let a = probe(0.05);
        let b = probe(0.05);
        assert_eq!(
            a.measure(1.3).unwrap().values,
            b.measure(1.3).unwrap().values
        );
        let c = a.with_seed(8);
        assert_ne!(
            a.measure(1.3).unwrap().values,
            c.measure(1.3).unwrap().values
        );
        assert!(Arc::ptr_eq(&a.clean, &c.clean));
    }

    #[test]
    fn noise_statistics() {
        let clean: Vec<Complex64> = (0..10_000)
            .map(|i| Complex64::new(1.0 + (i % 7) as f64, -0.5 - (i % 3) as f64))
            .collect();
        let model = NoiseModel::new(0.05, NoiseScale::PerPoint).unwrap();
        let noisy = model.apply(&clean, 1.0, 3);
        let (mut sr, mut si, mut sri) = (0.0, 0.0, 0.0);
        for (n, c) in noisy.iter().zip(&clean) {
            let a = (n.re - c.re) / c.re.abs();
            let b = (n.im - c.im) / c.im.abs();
            sr += a * a;
            si += b * b;
            sri += a * b;
        }
        let n = clean.len() as f64;
        let (sd_r, sd_i) = ((sr / n).sqrt(), (si / n).sqrt());
        assert!((sd_r / 0.05 - 1.0).abs() < 0.1, "{sd_r}");
        assert!((sd_i / 0.05 - 1.0).abs() < 0.1, "{sd_i}");
        assert!((sri / n / (sd_r * sd_i)).abs() < 0.05);
    }

    #[test]
    fn screen_wide_scale_uses_maximum() {
        let clean = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let model = NoiseModel::new(0.1, NoiseScale::ScreenWide).unwrap();
        let noisy = model.apply(&clean, 1.0, 1);
        assert!(noisy[1].re != 0.0);
        assert_eq!(noisy[1].im, 0.0);
        let per_point = NoiseModel::new(0.1, NoiseScale::PerPoint)
            .unwrap()
            .apply(&clean, 1.0, 1);
        assert_eq!(per_point[1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn geometry_precondition() {
        let p = WaveguideParams::new(0.005, FRAC_PI_2, 1.0).unwrap();
        let pose = Pose::new(0.2, -1.2).unwrap();
        let r = SimulatedProbe::new(
            p,
            pose,
            &Screen::default(),
            NoiseModel::none(),
            0,
            QuadratureOptions::default(),
        );
        assert!(matches!(r, Err(Error::Geometry(_))));
    }

    #[test]
    fn dataset_lookup_and_grid() {
        let pr = probe(0.0);
        let set = simulate(
            &pr.params,
            &pr.pose,
            &Screen {
                samples_per_segment: 8,
                ..Screen::default()
            },
            &[1.0, 1.1, 1.2],
            NoiseModel::none(),
            0,
            &QuadratureOptions::default(),
        )
        .unwrap();
        let d = DatasetProbe::new(set, 0.03).unwrap();
        assert_eq!(d.measure(1.11).unwrap().k, 1.1);
        assert!(matches!(
            d.measure(1.5),
            Err(Error::MissingFrequency { .. })
        ));
        let g = d.resolve_grid(&[0.99, 1.0, 1.01, 1.05, 1.09, 1.3]).unwrap();
        assert_eq!(g, vec![1.0, 1.1]);
    }

    #[test]
    fn recording_replays() {
        let pr = probe(0.03);
        let rec = RecordingProbe::new(&pr);
        let a = rec.measure(2.0).unwrap();
        rec.measure(1.0).unwrap();
        rec.measure(2.0).unwrap();
        let set = rec.into_measurement_set(pr.meta());
        assert_eq!(set.frequencies, vec![1.0, 2.0]);
        let d = DatasetProbe::new(set, 0.0).unwrap();
        assert_eq!(d.measure(2.0).unwrap().values, a.values);
    }
}
