//! Measurement frame, core pose and the polygonal screen.
//!
//! The screen and the source live in the measurement frame `S'` (source at
//! the origin). The core frame has the slab along `x = 0`; a pose
//! `(x0, alpha)` maps `S'` points into it with
//! `x = x0 + cos(alpha) x' + sin(alpha) z'`, `z = -sin(alpha) x' + cos(alpha) z'`,
//! so the source lands at `(x0, 0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the `(x, z)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub z: f64,
}

impl Point {
    pub const fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.z - other.z)
    }
}

/// Offset of the source from the core and rotation of the measurement frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x0: f64,
    pub alpha: f64,
}

impl Pose {
    pub fn new(x0: f64, alpha: f64) -> Result<Self> {
        if !(x0 > 0.0) || !x0.is_finite() {
            return Err(Error::Geometry(format!(
                "source offset x0 = {x0} must be positive"
            )));
        }
        if !(alpha.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Geometry(format!(
                "alpha = {alpha} outside (-pi/2, pi/2)"
            )));
        }
        Ok(Self { x0, alpha })
    }

    pub fn source(&self) -> Point {
        Point::new(self.x0, 0.0)
    }
}

/// Measurement frame to core frame.
pub fn transform(pose: &Pose, p: Point) -> Point {
    let (s, c) = pose.alpha.sin_cos();
    Point::new(pose.x0 + c * p.x + s * p.z, -s * p.x + c * p.z)
}

/// Core frame to measurement frame.
pub fn transform_inv(pose: &Pose, p: Point) -> Point {
    let (s, c) = pose.alpha.sin_cos();
    let u = p.x - pose.x0;
    Point::new(c * u - s * p.z, s * u + c * p.z)
}

/// Straight piece `x = slope (z - z_ref) + intercept`, `z in [z_start, z_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub slope: f64,
    pub intercept: f64,
    pub z_ref: f64,
    pub z_start: f64,
    pub z_end: f64,
}

impl Segment {
    pub fn x_at(&self, z: f64) -> f64 {
        self.slope * (z - self.z_ref) + self.intercept
    }

    pub fn length(&self) -> f64 {
        (self.z_end - self.z_start) * (1.0 + self.slope * self.slope).sqrt()
    }
}

/// Polygonal screen in the measurement frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Screen {
    pub segments: Vec<Segment>,
    pub samples_per_segment: usize,
}

impl Default for Screen {
    /// Two segments joined at `z = 4.5`, 64 samples each.
    fn default() -> Self {
        Self::two_segment(0.1, 0.1, -0.4, 0.1, 2.0, 7.0, 64)
    }
}

impl Screen {
    /// Two segments sharing `z_ref = (z1 + z2) / 2`.
    pub fn two_segment(
        a1: f64,
        b1: f64,
        a2: f64,
        b2: f64,
        z1: f64,
        z2: f64,
        samples: usize,
    ) -> Self {
        let zm = 0.5 * (z1 + z2);
        Self {
            segments: vec![
                Segment {
                    slope: a1,
                    intercept: b1,
                    z_ref: zm,
                    z_start: z1,
                    z_end: zm,
                },
                Segment {
                    slope: a2,
                    intercept: b2,
                    z_ref: zm,
                    z_start: zm,
                    z_end: z2,
                },
            ],
            samples_per_segment: samples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Geometry("screen has no segments".into()));
        }
        if self.samples_per_segment < 2 {
            return Err(Error::Geometry(
                "need at least two samples per segment".into(),
            ));
        }
        for s in &self.segments {
            let ok = [s.slope, s.intercept, s.z_ref, s.z_start, s.z_end]
                .iter()
                .all(|v| v.is_finite());
            if !ok || !(s.z_end > s.z_start) {
                return Err(Error::Geometry(format!("degenerate segment {s:?}")));
            }
        }
        Ok(())
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }
}

/// A screen sample: arclength `t`, position and trapezoid weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenSample {
    pub t: f64,
    pub point: Point,
    pub weight: f64,
}

/// Samples uniform in `z` on every segment, trapezoid weights in arclength.
///
/// A vertex shared by two segments appears once per segment; each copy
/// carries its own half-weight so the weights still sum to the length.
pub fn sample_screen(screen: &Screen) -> Result<Vec<ScreenSample>> {
    screen.validate()?;
    let n = screen.samples_per_segment;
    let mut out = Vec::with_capacity(n * screen.segments.len());
    let mut t0 = 0.0;
    for seg in &screen.segments {
        let dz = (seg.z_end - seg.z_start) / (n - 1) as f64;
        let stretch = (1.0 + seg.slope * seg.slope).sqrt();
        let dt = dz * stretch;
        for i in 0..n {
            let z = if i == n - 1 {
                seg.z_end
            } else {
                seg.z_start + dz * i as f64
            };
            let end = i == 0 || i == n - 1;
            out.push(ScreenSample {
                t: t0 + dt * i as f64,
                point: Point::new(seg.x_at(z), z),
                weight: if end { 0.5 * dt } else { dt },
            });
        }
        t0 += seg.length();
    }
    Ok(out)
}

/// Trapezoid `L^2` norm `sqrt(sum w |f|^2)` over the screen.
pub fn screen_norm(values: &[num_complex::Complex64], samples: &[ScreenSample]) -> Result<f64> {
    if values.len() != samples.len() {
        return Err(Error::Geometry(format!(
            "{} values for {} screen samples",
            values.len(),
            samples.len()
        )));
    }
    Ok(values
        .iter()
        .zip(samples)
        .map(|(v, s)| s.weight * v.norm_sqr())
        .sum::<f64>()
        .sqrt())
}
