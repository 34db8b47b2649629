//! Run configuration loaded from TOML.
//!
//! Every field has a default, so an empty file describes the reference
//! setup: `h = 0.005`, `nbar = pi/2`, `n_cl = 1`, pose `(1, pi/20)`, the
//! two-segment screen and the `[0.25, 4.5]` sweep.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Pose, Screen, Segment};
use crate::inversion::InversionConfig;
use crate::synth::{NoiseModel, NoiseScale, Truth};
use crate::waveguide::{QuadratureOptions, WaveguideParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveguideSection {
    pub h: f64,
    pub nbar: f64,
    pub n_cl: f64,
}

impl Default for WaveguideSection {
    fn default() -> Self {
        Self {
            h: 0.005,
            nbar: FRAC_PI_2,
            n_cl: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoseSection {
    pub x0: f64,
    pub alpha: f64,
}

impl Default for PoseSection {
    fn default() -> Self {
        Self {
            x0: 1.0,
            alpha: PI / 20.0,
        }
    }
}

/// Two segments `x = a_i (z - (z1 + z2)/2) + b_i` split at the midpoint of
/// `[z1, z2]`, or an explicit list of segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScreenSection {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub z1: f64,
    pub z2: f64,
    pub samples: usize,
    /// Overrides the two-segment parameters when non-empty.
    pub segments: Vec<Segment>,
}

impl Default for ScreenSection {
    fn default() -> Self {
        Self {
            a1: 0.1,
            b1: 0.1,
            a2: -0.4,
            b2: 0.1,
            z1: 2.0,
            z2: 7.0,
            samples: 64,
            segments: Vec::new(),
        }
    }
}

impl ScreenSection {
    pub fn screen(&self) -> Screen {
        if self.segments.is_empty() {
            Screen::two_segment(
                self.a1,
                self.b1,
                self.a2,
                self.b2,
                self.z1,
                self.z2,
                self.samples,
            )
        } else {
            Screen {
                segments: self.segments.clone(),
                samples_per_segment: self.samples,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// Percent, e.g. `3` for 3 %.
    pub pct: f64,
    pub scale: NoiseScale,
    pub seed: u64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            pct: 3.0,
            scale: NoiseScale::PerPoint,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

/// Full description of a simulation and identification run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub waveguide: WaveguideSection,
    pub pose: PoseSection,
    pub screen: ScreenSection,
    pub noise: NoiseSection,
    /// Forward-model quadrature.
    pub quadrature: QuadratureOptions,
    pub inversion: InversionConfig,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::schema(origin, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable in TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.waveguide()?;
        self.pose()?;
        self.screen().validate()?;
        self.noise()?;
        let q = &self.quadrature;
        if !(q.tolerance > 0.0) || !(q.refine_fraction > 0.0 && q.refine_fraction < 1.0) {
            return Err(Error::Config(
                "quadrature tolerance must be positive and refine_fraction in (0, 1)".into(),
            ));
        }
        self.inversion.validate()
    }

    pub fn waveguide(&self) -> Result<WaveguideParams> {
        let w = &self.waveguide;
        WaveguideParams::new(w.h, w.nbar, w.n_cl)
    }

    pub fn pose(&self) -> Result<Pose> {
        Pose::new(self.pose.x0, self.pose.alpha)
    }

    pub fn screen(&self) -> Screen {
        self.screen.screen()
    }

    pub fn noise(&self) -> Result<NoiseModel> {
        NoiseModel::new(self.noise.pct / 100.0, self.noise.scale)
    }

    pub fn truth(&self) -> Result<Truth> {
        Ok(Truth {
            waveguide: self.waveguide()?,
            pose: self.pose()?,
        })
    }
}
