//! Experiment drivers. Each writes a JSON report (and CSV where tabular)
//! into the output directory.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use matterwave::labframe::{frame_equivalence_check, lab_pattern, EquivalenceReport, GravityModel};
use matterwave::measurement::{pattern_full, pattern_shifted, Pattern};
use matterwave::visibility::{
    dephasing_phase, find_revival, fit_visibility, phasor_visibility, short_time_visibility,
    thermal_decoherence_time, write_curve_csv, CurvePoint, FringeModel, Revival, SpectrumKind,
};
use matterwave::Error;
use serde::{Deserialize, Serialize};

use crate::scenario::{Experiment, Method, Scenario};

/// Relative tolerance on the located `e^{-1}` crossing.
pub const TAU_TOLERANCE: f64 = 0.02;
const SECANT_STEPS: usize = 30;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Numerical(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub method: Method,
    pub distance: f64,
    pub k0: f64,
    pub t_mean: f64,
    pub points: usize,
    pub spacing: f64,
    pub integral: f64,
    /// Present for double slits only.
    pub fringe_wavenumber: Option<f64>,
    pub visibility: Option<f64>,
    pub phase: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub t: f64,
    pub distance: f64,
    pub v_fit: f64,
    /// `None` where the expansion is out of range.
    pub v_shorttime: Option<f64>,
    pub v_phasor: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub method: Method,
    pub k0: f64,
    pub mean_mass: f64,
    pub rows: Vec<CurveRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevivalReport {
    /// `None` when the spectrum never dephases.
    pub t_revival: Option<f64>,
    pub distance: Option<f64>,
    pub visibility_at_revival: Option<f64>,
    pub visibility_at_half: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauDecReport {
    pub n: f64,
    pub kt: f64,
    pub g: f64,
    pub separation: f64,
    pub tau_analytic: f64,
    pub t_crossing: f64,
    pub relative_error: f64,
    pub within_tolerance: bool,
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub headline: String,
}

pub fn run_scenario(scn: &Scenario, out_dir: &Path) -> Result<RunSummary, RunError> {
    std::fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    match scn.experiment {
        Experiment::Pattern => run_pattern(scn, out_dir),
        Experiment::VisibilityCurve => run_curve(scn, out_dir),
        Experiment::Revival => run_revival(scn, out_dir),
        Experiment::TauDec => run_tau_dec(scn, out_dir),
        Experiment::FrameEquivalence => run_frame_equivalence(scn, out_dir),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path).map(BufWriter::new).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Screen distance that puts the mean arrival at `t`.
pub fn distance_for(scn: &Scenario, t: f64) -> f64 {
    t * scn.k0 / scn.spectrum.mean()
}

/// Total pattern with the screen at `distance`.
pub fn simulate(scn: &Scenario, distance: f64) -> Result<Pattern, Error> {
    match scn.method {
        Method::Shifted => pattern_shifted(
            &scn.initial,
            &scn.axis,
            &scn.spectrum,
            &scn.screen.worldline(distance)?,
        ),
        Method::Full => pattern_full(
            &scn.initial,
            &scn.axis,
            &scn.spectrum,
            &scn.screen.worldline(distance)?,
        ),
        Method::Lab => lab_pattern(
            &scn.initial,
            &scn.axis,
            &scn.spectrum,
            gravity(scn)?,
            distance,
            None,
        ),
    }
}

fn gravity(scn: &Scenario) -> Result<&GravityModel, Error> {
    scn.gravity
        .as_ref()
        .ok_or_else(|| Error::Precondition("no gravity model configured".into()))
}

fn alpha(scn: &Scenario, distance: f64) -> Result<f64, Error> {
    scn.initial
        .fringe_wavenumber(distance)
        .ok_or_else(|| Error::Precondition("needs a double-slit source".into()))
}

fn fitted_visibility(scn: &Scenario, distance: f64) -> Result<f64, Error> {
    let p = simulate(scn, distance)?;
    Ok(fit_visibility(&p, alpha(scn, distance)?)?.visibility)
}

fn run_pattern(scn: &Scenario, out: &Path) -> Result<RunSummary, RunError> {
    let distance = scn.distance.expect("validated");
    let p = simulate(scn, distance)?;
    let fringe_wavenumber = scn.initial.fringe_wavenumber(distance);
    let fit = fringe_wavenumber
        .map(|a| fit_visibility(&p, a))
        .transpose()?;
    let report = PatternReport {
        method: scn.method,
        distance,
        k0: scn.k0,
        t_mean: p.reference_time,
        points: p.z.len(),
        spacing: p.spacing(),
        integral: p.integrated(),
        fringe_wavenumber,
        visibility: fit.as_ref().map(|f| f.visibility),
        phase: fit.as_ref().map(|f| f.phase),
    };
    let csv = out.join("pattern.csv");
    let mut w = create(&csv)?;
    p.write_csv(&mut w).map_err(io_err(&csv))?;
    let json = out.join("pattern.json");
    write_json(&json, &report)?;
    let headline = match report.visibility {
        Some(v) => format!("pattern at L = {distance}: V' = {v:.6}"),
        None => format!("pattern at L = {distance}: integral {:.6}", report.integral),
    };
    Ok(RunSummary {
        files: vec![csv, json],
        headline,
    })
}

fn curve_row(scn: &Scenario, t: f64) -> Result<CurveRow, Error> {
    let distance = distance_for(scn, t);
    let w = scn.screen.worldline(distance)?;
    let fringe = FringeModel::new(1.0, 1.0, alpha(scn, distance)?, 0.0)?;
    let phasor = phasor_visibility(&scn.spectrum, &dephasing_phase(&scn.spectrum, &fringe, &w, scn.k0)?)?;
    let v_shorttime = match short_time_visibility(&scn.spectrum, &fringe, &w, t) {
        Ok(r) => Some(r.visibility),
        Err(Error::UsePhasor { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CurveRow {
        t,
        distance,
        v_fit: fitted_visibility(scn, distance)?,
        v_shorttime,
        v_phasor: phasor.visibility,
        phi: phasor.phase,
    })
}

fn run_curve(scn: &Scenario, out: &Path) -> Result<RunSummary, RunError> {
    let sweep = scn.sweep.as_ref().expect("validated");
    let rows = sweep
        .times()
        .into_iter()
        .map(|t| curve_row(scn, t))
        .collect::<Result<Vec<_>, _>>()?;
    let points: Vec<CurvePoint> = rows
        .iter()
        .map(|r| CurvePoint {
            t: r.t,
            v_fit: r.v_fit,
            v_shorttime: r.v_shorttime.unwrap_or(f64::NAN),
            v_phasor: r.v_phasor,
            phi: r.phi,
        })
        .collect();
    let csv = out.join("visibility_curve.csv");
    let mut w = create(&csv)?;
    write_curve_csv(&points, &mut w).map_err(io_err(&csv))?;
    let json = out.join("visibility_curve.json");
    let worst = rows
        .iter()
        .map(|r| (r.v_fit - r.v_phasor).abs())
        .fold(0.0, f64::max);
    write_json(
        &json,
        &CurveReport {
            method: scn.method,
            k0: scn.k0,
            mean_mass: scn.spectrum.mean(),
            rows,
        },
    )?;
    Ok(RunSummary {
        files: vec![csv, json],
        headline: format!(
            "visibility curve, {} points: max |V_fit - V_phasor| = {worst:.3e}",
            points.len()
        ),
    })
}

fn run_revival(scn: &Scenario, out: &Path) -> Result<RunSummary, RunError> {
    // the located time does not depend on the probe distance
    let probe = scn.distance.unwrap_or(1.0);
    let fringe = FringeModel::new(1.0, 1.0, alpha(scn, probe)?, 0.0)?;
    let revival = find_revival(&scn.spectrum, &fringe, &scn.screen.worldline(probe)?, scn.k0)?;
    let report = match revival {
        Revival::AlwaysVisible => RevivalReport {
            t_revival: None,
            distance: None,
            visibility_at_revival: None,
            visibility_at_half: None,
        },
        Revival::At(t) => {
            let distance = distance_for(scn, t);
            RevivalReport {
                t_revival: Some(t),
                distance: Some(distance),
                visibility_at_revival: Some(fitted_visibility(scn, distance)?),
                visibility_at_half: Some(fitted_visibility(scn, distance_for(scn, 0.5 * t))?),
            }
        }
    };
    let json = out.join("revival.json");
    write_json(&json, &report)?;
    let headline = match (report.t_revival, report.visibility_at_revival, report.visibility_at_half) {
        (Some(t), Some(v), Some(h)) => {
            format!("revival at t = {t:.6}: V' = {v:.5}, V'(t/2) = {h:.3e}")
        }
        _ => "single mass: always visible".to_string(),
    };
    Ok(RunSummary {
        files: vec![json],
        headline,
    })
}

fn run_tau_dec(scn: &Scenario, out: &Path) -> Result<RunSummary, RunError> {
    let SpectrumKind::Thermal { n, kt, .. } = *scn.spectrum.kind() else {
        unreachable!("validated thermal spectrum")
    };
    let g = scn.screen.acceleration().expect("validated");
    let separation = scn.initial.slit_separation().expect("validated").abs();
    let tau = thermal_decoherence_time(n, kt, g, separation)?;
    let target = (-1.0f64).exp();
    let f = |t: f64| fitted_visibility(scn, distance_for(scn, t)).map(|v| v - target);
    let (mut a, mut b) = (0.9 * tau, 1.1 * tau);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    for _ in 0..SECANT_STEPS {
        if (b - a).abs() < 1e-7 * tau || fb == fa {
            break;
        }
        let c = b - fb * (b - a) / (fb - fa);
        if !(c > 0.0) {
            return Err(Error::NotConverged(format!("secant left t > 0 at {c}")).into());
        }
        let fc = f(c)?;
        (a, fa, b, fb) = (b, fb, c, fc);
    }
    if fb.abs() > 1e-6 {
        return Err(Error::NotConverged(format!("e^-1 crossing residual {fb:.3e}")).into());
    }
    let relative_error = b / tau - 1.0;
    let report = TauDecReport {
        n,
        kt,
        g,
        separation,
        tau_analytic: tau,
        t_crossing: b,
        relative_error,
        within_tolerance: relative_error.abs() <= TAU_TOLERANCE,
    };
    let json = out.join("tau_dec.json");
    write_json(&json, &report)?;
    Ok(RunSummary {
        files: vec![json],
        headline: format!(
            "tau_dec = {tau:.6}, simulated e^-1 crossing at {b:.6} ({:+.3}%)",
            100.0 * relative_error
        ),
    })
}

fn run_frame_equivalence(scn: &Scenario, out: &Path) -> Result<RunSummary, RunError> {
    let distance = scn.distance.expect("validated");
    let report: EquivalenceReport =
        frame_equivalence_check(&scn.initial, &scn.axis, &scn.spectrum, gravity(scn)?, distance)?;
    let json = out.join("frame_equivalence.json");
    write_json(&json, &report)?;
    Ok(RunSummary {
        files: vec![json],
        headline: format!(
            "frame equivalence {}: rms {:.3e}, dV {:.3e}",
            if report.pass { "holds" } else { "FAILS" },
            report.rms_pattern_diff,
            report.delta_visibility
        ),
    })
}
