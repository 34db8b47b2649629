//! End-to-end identification and its report.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{step1_scan, step2_fit_pose, step3_h_linearized, step3_peak_width_with};
use super::{InversionConfig, LinearizedThickness, PoseFit};
use crate::error::{Error, Result};
use crate::synth::{FieldProbe, Truth};

/// Stage labels used in failures and errors.
pub const STAGE_SCAN: &str = "step1_scan";
pub const STAGE_POSE: &str = "step2_pose";
pub const STAGE_LINEARIZED: &str = "step3_linearized";
pub const STAGE_PEAK_WIDTH: &str = "step3_peak_width";

/// `nbar / h` for each thickness strategy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub lin: Option<f64>,
    pub peak: Option<f64>,
}

/// Relative errors against the true parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RelativeErrors {
    pub khat1: Option<f64>,
    pub nbar: Option<f64>,
    pub x0: Option<f64>,
    pub alpha: Option<f64>,
    pub h_lin: Option<f64>,
    pub h_peak: Option<f64>,
    pub nh_lin: Option<f64>,
    pub nh_peak: Option<f64>,
}

/// One row of the resonance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakRow {
    pub p: usize,
    pub k_coarse: f64,
    pub k_hat: f64,
    pub e_min: f64,
    pub prominent: bool,
    /// `None` if the width window was not covered.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub config: InversionConfig,
    pub failures: Vec<StageFailure>,
    /// Non-fatal inconsistencies, e.g. a step-1 estimate far from the `nbar` hint.
    pub warnings: Vec<String>,
    pub median_derivative: Option<f64>,
    pub threshold: Option<f64>,
    pub peaks: Vec<PeakRow>,
    /// Number of distinct frequencies evaluated in step 1.
    pub scan_evaluations: usize,
    pub pose: Option<PoseFit>,
    pub linearized: Option<LinearizedThickness>,
}

/// Estimates, errors and diagnostics of one identification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionReport {
    pub khat1: Option<f64>,
    pub nbar_hat: Option<f64>,
    pub x0_hat: Option<f64>,
    pub alpha_hat: Option<f64>,
    pub h_hat_lin: Option<f64>,
    pub h_hat_peak: Option<f64>,
    pub nh_hat: IndexEstimate,
    pub errors_rel: Option<RelativeErrors>,
    pub diagnostics: Diagnostics,
}

impl InversionReport {
    pub fn is_complete(&self) -> bool {
        self.diagnostics.failures.is_empty()
    }

    /// First recorded stage failure, as a labelled error.
    pub fn first_failure(&self) -> Option<&StageFailure> {
        self.diagnostics.failures.first()
    }
}

fn rel(est: Option<f64>, truth: f64) -> Option<f64> {
    est.map(|e| ((e - truth) / truth).abs())
}

/// Runs steps 1, 2, 3(i) and 3(ii).
///
/// Only an invalid configuration is returned as an error; a failing stage
/// is recorded in the report and leaves the estimates that depend on it
/// empty. `truth`, when given, adds relative errors.
pub fn run_pipeline(
    probe: &dyn FieldProbe,
    n_cl: f64,
    cfg: &InversionConfig,
    truth: Option<&Truth>,
) -> Result<InversionReport> {
    cfg.validate()?;
    if !(n_cl > 0.0) {
        return Err(Error::Config(format!("n_cl = {n_cl} must be positive")));
    }
    let mut report = InversionReport {
        khat1: None,
        nbar_hat: None,
        x0_hat: None,
        alpha_hat: None,
        h_hat_lin: None,
        h_hat_peak: None,
        nh_hat: IndexEstimate::default(),
        errors_rel: None,
        diagnostics: Diagnostics {
            config: cfg.clone(),
            failures: Vec::new(),
            warnings: Vec::new(),
            median_derivative: None,
            threshold: None,
            peaks: Vec::new(),
            scan_evaluations: 0,
            pose: None,
            linearized: None,
        },
    };
    let fail = |report: &mut InversionReport, stage: &str, e: Error| {
        log::warn!("{stage} failed: {e}");
        report.diagnostics.failures.push(StageFailure {
            stage: stage.to_string(),
            message: e.to_string(),
        });
    };

    let scan = match step1_scan(probe, n_cl, cfg) {
        Ok(s) => s,
        Err(e) => {
            fail(&mut report, STAGE_SCAN, e);
            return Ok(finish(report, truth));
        }
    };
    let k1 = scan.khat1().expect("scan returns at least one peak");
    let nbar = FRAC_PI_2 / k1;
    report.khat1 = Some(k1);
    report.nbar_hat = Some(nbar);
    report.diagnostics.median_derivative = Some(scan.median_derivative);
    report.diagnostics.threshold = Some(scan.threshold);
    report.diagnostics.scan_evaluations = scan.samples.len();
    log::info!("step 1: khat1 = {k1:.6}, nbar = {nbar:.6}");
    if let Some(hint) = cfg.nbar_hint {
        if (nbar / hint - 1.0).abs() > cfg.hint_tolerance {
            let msg = format!(
                "nbar_hat = {nbar:.5} is inconsistent with the hint {hint:.5}; the first detected peak may not be the first resonance"
            );
            log::warn!("{msg}");
            report.diagnostics.warnings.push(msg);
        }
    }

    let mut bands = Vec::new();
    for peak in &scan.peaks {
        let delta = match step3_peak_width_with(&scan, cfg.beta, peak.p, cfg.width_extrema) {
            Ok(d) => Some(d),
            Err(e) if peak.p == 1 => {
                fail(&mut report, STAGE_PEAK_WIDTH, e);
                None
            }
            Err(e) => {
                log::info!("peak {}: {e}", peak.p);
                None
            }
        };
        if let Some(d) = delta {
            bands.push((peak.k_hat, d));
        }
        report.diagnostics.peaks.push(PeakRow {
            p: peak.p,
            k_coarse: peak.k_coarse,
            k_hat: peak.k_hat,
            e_min: peak.e_min,
            prominent: peak.prominent,
            delta,
        });
    }
    if let Some(d1) = report.diagnostics.peaks[0].delta {
        let h = d1 / cfg.peak_constant;
        report.h_hat_peak = Some(h);
        report.nh_hat.peak = Some(nbar / h);
        log::info!("step 3(ii): delta_1 = {d1:.4e}, h = {h:.5}");
    }

    match step2_fit_pose(probe, n_cl, k1, &bands, cfg) {
        Ok(fit) => {
            log::info!(
                "step 2: x0 = {:.5}, alpha = {:.5} after {} iterations",
                fit.pose.x0,
                fit.pose.alpha,
                fit.iterations
            );
            report.x0_hat = Some(fit.pose.x0);
            report.alpha_hat = Some(fit.pose.alpha);
            let pose = fit.pose;
            report.diagnostics.pose = Some(fit);
            match step3_h_linearized(probe, &pose, nbar, n_cl, cfg.linearized_factor * k1, cfg) {
                Ok(lin) => {
                    log::info!("step 3(i): h = {:.5} at k = {:.5}", lin.h, lin.k);
                    report.h_hat_lin = Some(lin.h);
                    report.nh_hat.lin = Some(nbar / lin.h);
                    report.diagnostics.linearized = Some(lin);
                }
                Err(e) => fail(&mut report, STAGE_LINEARIZED, e),
            }
        }
        Err(e) => fail(&mut report, STAGE_POSE, e),
    }
    Ok(finish(report, truth))
}

fn finish(mut report: InversionReport, truth: Option<&Truth>) -> InversionReport {
    if let Some(t) = truth {
        let w = &t.waveguide;
        let nh = w.n_h();
        report.errors_rel = Some(RelativeErrors {
            khat1: rel(report.khat1, FRAC_PI_2 / w.nbar),
            nbar: rel(report.nbar_hat, w.nbar),
            x0: rel(report.x0_hat, t.pose.x0),
            alpha: rel(report.alpha_hat, t.pose.alpha),
            h_lin: rel(report.h_hat_lin, w.h),
            h_peak: rel(report.h_hat_peak, w.h),
            nh_lin: rel(report.nh_hat.lin, nh),
            nh_peak: rel(report.nh_hat.peak, nh),
        });
    }
    report
}
