//! Dephasing of the fringe pattern across the mass spectrum.
//!
//! Species `m` reaches the screen at `t_m = m L / k0`, while the screen has
//! moved by `z̃(t_m)`. Expanding around the mean arrival time gives a phase
//! `δφ_m = α ż̃(t̄) (m - m̄) L / k0` per species; the observed visibility is the
//! magnitude of the weighted phasor sum.

mod fit;
mod spectrum;

pub use fit::{estimate_wavenumber, fit_fringes, FitOptions, FringeFit, MIN_PERIODS};
pub use spectrum::{
    MassSpectrum, SpectrumKind, DEFAULT_NODES, MAX_RELATIVE_SPREAD, WEIGHT_SUM_TOLERANCE,
};

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::Pattern;
use crate::wavepacket::InitialState;
use crate::worldline::{ScreenWorldline, WorldlineKind};

/// Largest quadratic correction accepted by the short-time expansion.
pub const SHORT_TIME_LIMIT: f64 = 0.5;
/// Relative tolerance when matching mass ratios to rationals.
pub const REVIVAL_TOLERANCE: f64 = 1e-9;
/// Largest denominator accepted when expressing a spacing ratio as a rational.
pub const MAX_REVIVAL_DENOMINATOR: u64 = 1000;

/// `C [1 + V cos(αz + φ)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeModel {
    pub baseline: f64,
    pub visibility: f64,
    pub wavenumber: f64,
    pub phase: f64,
}

impl FringeModel {
    pub fn new(baseline: f64, visibility: f64, wavenumber: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::arg("visibility", format!("{visibility} not in [0, 1]")));
        }
        if !(wavenumber > 0.0 && wavenumber.is_finite()) {
            return Err(Error::arg("wavenumber", format!("{wavenumber} must be positive")));
        }
        Ok(Self {
            baseline,
            visibility,
            wavenumber,
            phase,
        })
    }

    /// Perfect-contrast fringe of a double slit at distance `L`.
    pub fn double_slit(ini: &InitialState, distance: f64) -> Result<Self> {
        let alpha = ini
            .fringe_wavenumber(distance)
            .ok_or_else(|| Error::Precondition("fringe model needs a double-slit state".into()))?;
        Self::new(1.0, 1.0, alpha, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisibilityMethod {
    Fit,
    ShortTime,
    Phasor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityReport {
    pub visibility: f64,
    pub phase: f64,
    pub method: VisibilityMethod,
    pub time: Option<f64>,
    pub spectrum: Option<SpectrumKind>,
}

/// First-order phase of every spectrum node relative to the mean mass.
pub fn dephasing_phase(
    spectrum: &MassSpectrum,
    fringe: &FringeModel,
    w: &ScreenWorldline,
    k0: f64,
) -> Result<Vec<f64>> {
    let s = w.distance() / k0;
    let mean = spectrum.mean();
    let t_mean = mean * s;
    let zdot = w.velocity(t_mean)?;
    Ok(spectrum
        .species()
        .iter()
        .map(|sp| fringe.wavenumber * zdot * (sp.mass - mean) * s)
        .collect())
}

/// Double-slit form of the same phase under `z̃ = g t²/2`:
/// `g t̄ (m - m̄) (z1 - z2)`.
pub fn double_slit_phase(spectrum: &MassSpectrum, g: f64, t_mean: f64, separation: f64) -> Vec<f64> {
    let mean = spectrum.mean();
    spectrum
        .species()
        .iter()
        .map(|sp| g * t_mean * (sp.mass - mean) * separation)
        .collect()
}

/// `|Σ p e^{iδφ}|` and its argument.
pub fn phasor_visibility(spectrum: &MassSpectrum, phases: &[f64]) -> Result<VisibilityReport> {
    let species = spectrum.species();
    if species.len() != phases.len() {
        return Err(Error::arg(
            "phases",
            format!("{} phases for {} spectrum nodes", phases.len(), species.len()),
        ));
    }
    if phases.iter().any(|p| !p.is_finite()) {
        return Err(Error::arg("phases", "non-finite phase"));
    }
    let sum: Complex64 = species
        .iter()
        .zip(phases)
        .map(|(s, &p)| s.weight * Complex64::from_polar(1.0, p))
        .sum();
    Ok(VisibilityReport {
        visibility: sum.norm().min(1.0),
        phase: sum.arg(),
        method: VisibilityMethod::Phasor,
        time: None,
        spectrum: Some(spectrum.kind().clone()),
    })
}

/// Second-order expansion in the relative mass spread:
/// `V'/V = 1 - α² ż̃² t̄² (Δm/m̄)² / 2`, `φ' = α z̈̃ t̄² (Δm/m̄)² / 2`.
pub fn short_time_visibility(
    spectrum: &MassSpectrum,
    fringe: &FringeModel,
    w: &ScreenWorldline,
    t_mean: f64,
) -> Result<VisibilityReport> {
    let r2 = (spectrum.std() / spectrum.mean()).powi(2);
    let zdot = w.velocity(t_mean)?;
    let zddot = w.acceleration(t_mean)?;
    let alpha = fringe.wavenumber;
    let correction = 0.5 * (alpha * zdot * t_mean).powi(2) * r2;
    if correction > SHORT_TIME_LIMIT {
        return Err(Error::UsePhasor { correction });
    }
    Ok(VisibilityReport {
        visibility: fringe.visibility * (1.0 - correction),
        phase: fringe.phase + 0.5 * alpha * zddot * t_mean * t_mean * r2,
        method: VisibilityMethod::ShortTime,
        time: Some(t_mean),
        spectrum: Some(spectrum.kind().clone()),
    })
}

/// Double-slit form `1 - (g Δz Δm)² t̄² / 2`.
pub fn short_time_double_slit(g: f64, separation: f64, mass_std: f64, t_mean: f64) -> Result<f64> {
    let correction = 0.5 * (g * separation * mass_std * t_mean).powi(2);
    if correction > SHORT_TIME_LIMIT {
        return Err(Error::UsePhasor { correction });
    }
    Ok(1.0 - correction)
}

/// `τ_dec = √(2/N) / (k_B T g |Δz|)`.
pub fn thermal_decoherence_time(n: f64, kt: f64, g: f64, separation: f64) -> Result<f64> {
    for (name, v) in [("n", n), ("kt", kt), ("g", g), ("separation", separation)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::arg(name, format!("{v} must be positive")));
        }
    }
    Ok((2.0 / n).sqrt() / (kt * g * separation))
}

/// Characteristic function of the internal energy `H0 = m - m̄` at `Δτ`.
pub fn proper_time_visibility(spectrum: &MassSpectrum, delta_tau: f64) -> Result<VisibilityReport> {
    if !delta_tau.is_finite() {
        return Err(Error::arg("delta_tau", "must be finite"));
    }
    let mean = spectrum.mean();
    let phases: Vec<f64> = spectrum
        .species()
        .iter()
        .map(|s| (s.mass - mean) * delta_tau)
        .collect();
    phasor_visibility(spectrum, &phases)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Revival {
    /// A single mass never dephases.
    AlwaysVisible,
    At(f64),
}

/// Smallest mean arrival time at which every pairwise phase difference is a
/// multiple of 2π.
pub fn find_revival(
    spectrum: &MassSpectrum,
    fringe: &FringeModel,
    w: &ScreenWorldline,
    k0: f64,
) -> Result<Revival> {
    let g = match w.kind() {
        WorldlineKind::UniformAcceleration { g } => *g,
        _ => {
            return Err(Error::Precondition(
                "revival needs a uniformly accelerating screen".into(),
            ))
        }
    };
    let SpectrumKind::Discrete { masses, .. } = spectrum.kind() else {
        return Err(Error::InvalidSpectrum(
            "revival is defined for discrete spectra only".into(),
        ));
    };
    let mut distinct: Vec<f64> = masses.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() <= REVIVAL_TOLERANCE * b.abs());
    if distinct.len() < 2 || g == 0.0 {
        return Ok(Revival::AlwaysVisible);
    }
    let diffs: Vec<f64> = distinct.iter().map(|m| m - distinct[0]).skip(1).collect();
    let unit = commensurate_unit(&diffs)?;
    // phase rate per unit t̄ and mass offset: α g L / k0
    let rate = fringe.wavenumber * g * w.distance() / k0;
    let t = TAU / (rate * unit).abs();
    let mean = spectrum.mean();
    let phases: Vec<f64> = spectrum
        .species()
        .iter()
        .map(|sp| rate * t * (sp.mass - mean))
        .collect();
    let check = phasor_visibility(spectrum, &phases)?;
    if check.visibility < 1.0 - 1e-9 {
        return Err(Error::NoExactRevival(format!(
            "phasor visibility {} at candidate {t}",
            check.visibility
        )));
    }
    Ok(Revival::At(t))
}

/// Largest `D` with every entry an integer multiple of `D`, to relative
/// tolerance [`REVIVAL_TOLERANCE`].
pub fn commensurate_unit(values: &[f64]) -> Result<f64> {
    let base = values
        .iter()
        .map(|v| v.abs())
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !base.is_finite() {
        return Err(Error::NoExactRevival("all differences vanish".into()));
    }
    let mut fracs = Vec::with_capacity(values.len());
    for &v in values {
        let (p, q) = rational(v.abs() / base).ok_or_else(|| {
            Error::NoExactRevival(format!("mass ratio {} is not rational", v.abs() / base))
        })?;
        fracs.push((p, q));
    }
    let lcm_q = fracs.iter().fold(1u64, |acc, &(_, q)| lcm(acc, q));
    if lcm_q > MAX_REVIVAL_DENOMINATOR {
        return Err(Error::NoExactRevival("spacings are incommensurate".into()));
    }
    let g = fracs.iter().fold(0u64, |acc, &(p, q)| gcd(acc, p * (lcm_q / q)));
    Ok(base / lcm_q as f64 * g as f64)
}

fn rational(x: f64) -> Option<(u64, u64)> {
    // continued fraction convergents
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e12 {
            return None;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_REVIVAL_DENOMINATOR {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= REVIVAL_TOLERANCE * x.max(1.0) {
            return Some((h1, k1));
        }
        let frac = r - a as f64;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Fits the total pattern with the known fringe wavenumber.
pub fn fit_visibility(pattern: &Pattern, alpha: f64) -> Result<VisibilityReport> {
    let f = fit_fringes(&pattern.z, &pattern.total, alpha, FitOptions::default())?;
    Ok(VisibilityReport {
        visibility: f.visibility.min(1.0),
        phase: f.phase,
        method: VisibilityMethod::Fit,
        time: Some(pattern.reference_time),
        spectrum: None,
    })
}

/// One row of a visibility curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: f64,
    pub v_fit: f64,
    /// `NaN` where the expansion is out of range.
    pub v_shorttime: f64,
    pub v_phasor: f64,
    pub phi: f64,
}

pub fn write_curve_csv<W: Write>(points: &[CurvePoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,V_fit,V_shorttime,V_phasor,phi")?;
    for p in points {
        writeln!(
            out,
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            p.t, p.v_fit, p.v_shorttime, p.v_phasor, p.phi
        )?;
    }
    Ok(())
}
