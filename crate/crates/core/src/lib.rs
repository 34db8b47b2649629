//! Forward model and core identification for a thin high-contrast open waveguide.
//!
//! The forward side evaluates the exact Green function `G` of a slab of
//! half-thickness `h` and index `n_h` in a cladding of index `n_cl`, together
//! with its thin-core asymptotic approximations built from the free-space
//! function `H` and the correction fields `Phi`, `Psi`. The inverse side
//! recovers the scaled index `nbar = n_h h`, the source pose and the
//! thickness `h` from multifrequency screen data.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod geometry;
pub mod homogeneous;
pub mod inversion;
pub mod quadrature;
pub mod selfcheck;
pub mod specfun;
pub mod synth;
pub mod waveguide;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use geometry::{Point, Pose, Screen, ScreenSample};
pub use inversion::{InversionConfig, InversionReport};
pub use num_complex::Complex64;
pub use synth::{DatasetProbe, FieldProbe, MeasurementSet, NoiseModel, SimulatedProbe, Truth};
pub use waveguide::{GreenParts, QuadratureOptions, WaveguideParams};
