//! Lab-frame evolution under uniform gravity with a static (or uniformly
//! moving) screen, and the comparison with the freely falling frame.
//!
//! Under `H = p²/2m + V(x)` with a linear potential every species accelerates
//! uniformly. The potential is applied as a shift of the carrier wavenumber,
//! so a split step never leaves momentum space.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{
    integrate_window, pattern_full, relative_rms, sample_evolved, total_pattern, Pattern,
    PatternMethod, SpeciesPattern,
};
use crate::visibility::{fit_visibility, MassSpectrum, SpectrumKind};
use crate::wavepacket::{
    self, check_nonrelativistic, AxisLabel, GridAxis, InitialState, Species, WavefunctionGrid,
    NONRELATIVISTIC_LIMIT,
};
use crate::worldline::ScreenWorldline;

/// Largest density change, relative to the peak, accepted between `n` and `2n` steps.
pub const STEP_TOLERANCE: f64 = 1e-6;
pub const MIN_STEPS: usize = 4;
pub const MAX_STEPS: usize = 1 << 14;
/// RMS pattern difference (relative to peak) accepted by the frame check.
pub const EQUIVALENCE_RMS: f64 = 0.01;
/// Visibility difference accepted by the frame check.
pub const EQUIVALENCE_VISIBILITY: f64 = 0.01;
/// Relative tolerance when looking up the force on a species by its mass.
const MASS_MATCH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeciesForce {
    pub mass: f64,
    /// Signed force components `(x, y, z)`.
    pub force: [f64; 3],
}

/// How gravity couples to each species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GravityModel {
    /// `H = p²/2m + m g·x`: every species accelerates by `-g`.
    Eep { g: [f64; 3] },
    /// `H = p²/2m - G_m·x`: species `m` accelerates by `G_m / m`.
    Violating { forces: Vec<SpeciesForce> },
}

impl GravityModel {
    /// Uniform field of strength `g` pointing toward `-z`.
    pub fn eep_z(g: f64) -> Self {
        GravityModel::Eep { g: [0.0, 0.0, g] }
    }

    /// Per-species forces reproducing the uniform field `g`: `G_m = -m g`.
    pub fn violating_equivalent(g: [f64; 3], masses: &[f64]) -> Self {
        GravityModel::Violating {
            forces: masses
                .iter()
                .map(|&mass| SpeciesForce {
                    mass,
                    force: g.map(|c| -mass * c),
                })
                .collect(),
        }
    }

    /// Violating model with `G_m = m a_m ẑ` for the given `(mass, a_m)` pairs.
    pub fn violating_z(accelerations: &[(f64, f64)]) -> Self {
        GravityModel::Violating {
            forces: accelerations
                .iter()
                .map(|&(mass, a)| SpeciesForce {
                    mass,
                    force: [0.0, 0.0, mass * a],
                })
                .collect(),
        }
    }

    pub fn is_eep(&self) -> bool {
        matches!(self, GravityModel::Eep { .. })
    }

    pub fn acceleration(&self, mass: f64) -> Result<[f64; 3]> {
        match self {
            GravityModel::Eep { g } => Ok(g.map(|c| -c)),
            GravityModel::Violating { forces } => forces
                .iter()
                .find(|f| (f.mass - mass).abs() <= MASS_MATCH * mass)
                .map(|f| f.force.map(|c| c / mass))
                .ok_or_else(|| Error::arg("forces", format!("no force given for mass {mass}"))),
        }
    }
}

/// Mean motion of one species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergTrajectory {
    pub x0: [f64; 3],
    pub p0: [f64; 3],
    pub mass: f64,
    pub model: GravityModel,
}

/// `x0 + p0 t / m + a t² / 2`.
pub fn heisenberg_mean(traj: &HeisenbergTrajectory, t: f64) -> Result<[f64; 3]> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidTime(t));
    }
    let a = traj.model.acceleration(traj.mass)?;
    Ok(std::array::from_fn(|i| {
        traj.x0[i] + traj.p0[i] * t / traj.mass + 0.5 * a[i] * t * t
    }))
}

fn axis_index(label: AxisLabel) -> usize {
    match label {
        AxisLabel::X => 0,
        AxisLabel::Y => 1,
        AxisLabel::Z => 2,
    }
}

/// Acceleration along each gridded axis; any force along an axis that is not
/// gridded is rejected.
fn gridded_acceleration(psi: &WavefunctionGrid, model: &GravityModel, mass: f64) -> Result<Vec<f64>> {
    let a = model.acceleration(mass)?;
    let gridded: Vec<usize> = psi.axes().iter().map(|ax| axis_index(ax.label)).collect();
    if let Some(i) = (0..3).find(|i| a[*i] != 0.0 && !gridded.contains(i)) {
        return Err(Error::Precondition(format!(
            "force along axis {} which is not gridded",
            ["x", "y", "z"][i]
        )));
    }
    Ok(gridded.iter().map(|&i| a[i]).collect())
}

/// Strang splitting in momentum space: half kick, drift, half kick.
fn strang(k: &WavefunctionGrid, mass: f64, accel: &[f64], t: f64, steps: usize) -> WavefunctionGrid {
    let mut e = k.clone();
    if t == 0.0 {
        return e;
    }
    let dt = t / steps as f64;
    let kick = |e: &mut WavefunctionGrid, frac: f64| {
        for (ax, a) in e.axes_mut().iter_mut().zip(accel) {
            ax.carrier += frac * mass * a * dt;
        }
    };
    kick(&mut e, 0.5);
    for step in 0..steps {
        wavepacket::evolve_momentum(&mut e, dt / mass);
        kick(&mut e, if step + 1 == steps { 0.5 } else { 1.0 });
    }
    e
}

fn check_momentum(k: &WavefunctionGrid, mass: f64, accel: &[f64], t: f64) -> Result<()> {
    let worst = k
        .axes()
        .iter()
        .zip(accel)
        .map(|(ax, a)| {
            let edge = ax.carrier.abs().max((ax.carrier + mass * a * t).abs());
            edge / mass
        })
        .fold(0.0, f64::max);
    if worst >= NONRELATIVISTIC_LIMIT {
        return Err(Error::NonRelativistic { ratio: worst });
    }
    Ok(())
}

/// Smallest step count (doubling from [`MIN_STEPS`]) whose density agrees with
/// twice as many steps to [`STEP_TOLERANCE`] of the peak.
fn converged_steps(k: &WavefunctionGrid, mass: f64, accel: &[f64], t: f64) -> Result<usize> {
    let mut steps = MIN_STEPS;
    let mut prev = strang(k, mass, accel, t, steps).to_position();
    loop {
        let next = strang(k, mass, accel, t, 2 * steps).to_position();
        let (a, b) = (prev.density(), next.density());
        let peak = b.iter().copied().fold(0.0, f64::max);
        let change = if prev.same_sampling(&next) {
            a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        if change <= STEP_TOLERANCE * peak {
            return Ok(steps);
        }
        if 2 * steps >= MAX_STEPS {
            return Err(Error::NotConverged(format!(
                "split-step density still changes by {:.3e} of peak at {} steps",
                change / peak,
                2 * steps
            )));
        }
        steps *= 2;
        prev = next;
    }
}

/// Evolves `ψ` for time `t` under the gravity model, returning the position
/// representation.
pub fn evolve_packet_lab(
    psi: &WavefunctionGrid,
    species: Species,
    model: &GravityModel,
    t: f64,
) -> Result<WavefunctionGrid> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidTime(t));
    }
    let accel = gridded_acceleration(psi, model, species.mass)?;
    let k = psi.to_momentum();
    k.check_bandwidth()?;
    check_momentum(&k, species.mass, &accel, t)?;
    let steps = converged_steps(&k, species.mass, &accel, t)?;
    Ok(strang(&k, species.mass, &accel, t, steps).to_position())
}

/// Mean landing velocity of the packets in the lab, `a_z t_m̄`.
pub fn landing_velocity(model: &GravityModel, spectrum: &MassSpectrum, k0: f64, distance: f64) -> Result<f64> {
    let t_mean = wavepacket::arrival_time(spectrum.mean(), k0, distance)?;
    let a = spectrum
        .species()
        .iter()
        .map(|s| model.acceleration(s.mass).map(|a| s.weight * a[2]))
        .sum::<Result<f64>>()?;
    Ok(a * t_mean)
}

fn lab_species_pattern(
    ini: &InitialState,
    axis: &GridAxis,
    species: Species,
    model: &GravityModel,
    distance: f64,
    screen_velocity: f64,
    offset: f64,
) -> Result<Vec<f64>> {
    let m = species.mass;
    let k0 = ini.k0();
    let psi = ini.z_profile(axis)?;
    let accel = gridded_acceleration(&psi, model, m)?;
    let k = psi.to_momentum();
    k.check_bandwidth()?;
    let (a, b) = crate::measurement::crossing_window(ini, m, distance)?;
    check_momentum(&k, m, &accel, b)?;
    // linear forces make the splitting exact up to a phase, so the count that
    // converges at the latest time serves the whole window
    let steps = converged_steps(&k, m, &accel, b)?;
    let v = k0 / m;
    let y = ini.y_factor();
    let origin = axis.origin;
    integrate_window(a.max(0.0), b, |t| {
        let e = strang(&k, m, &accel, t, steps);
        let weight = v * y.density(m, v, t, distance);
        let (vals, _) = sample_evolved(e, origin, screen_velocity * t - offset, false)?;
        Ok(vals.iter().map(|c| weight * c.norm_sqr()).collect())
    })
}

/// Pattern on a lab screen at `y = L` moving along `z` with `screen_velocity`.
/// The `Z` grid is anchored so that at `t_m̄` it coincides with the relative
/// coordinate of a freely falling packet, which makes it directly comparable
/// with [`pattern_full`] on an accelerating screen.
pub fn lab_pattern(
    ini: &InitialState,
    axis: &GridAxis,
    spectrum: &MassSpectrum,
    model: &GravityModel,
    distance: f64,
    screen_velocity: Option<f64>,
) -> Result<Pattern> {
    let k0 = ini.k0();
    check_nonrelativistic(k0, spectrum.masses())?;
    let ratio = ini.packet_size() / distance;
    if ratio > wavepacket::PARAXIAL_LIMIT {
        return Err(Error::ParaxialViolated { ratio });
    }
    let u = screen_velocity.unwrap_or(0.0);
    if u.abs() >= 1.0 {
        return Err(Error::Superluminal { t: 0.0, beta: u });
    }
    let t_ref = wavepacket::arrival_time(spectrum.mean(), k0, distance)?;
    let a_mean = spectrum
        .species()
        .iter()
        .map(|s| model.acceleration(s.mass).map(|a| s.weight * a[2]))
        .sum::<Result<f64>>()?;
    // relative coordinate Z = z - u t, shifted by the mean fall at t_ref
    let offset = u * t_ref - 0.5 * a_mean * t_ref * t_ref;
    let z: Vec<f64> = axis.positions().iter().map(|z| z - offset).collect();
    let nodes = spectrum.species();
    let densities = nodes
        .par_iter()
        .map(|s| lab_species_pattern(ini, axis, *s, model, distance, u, offset))
        .collect::<Result<Vec<_>>>()?;
    let worldline = if u == 0.0 {
        ScreenWorldline::rest(distance)?
    } else {
        ScreenWorldline::uniform_velocity(u, distance)?
    };
    let parts: Vec<Pattern> = nodes
        .iter()
        .zip(densities)
        .map(|(s, density)| Pattern {
            z: z.clone(),
            species: vec![SpeciesPattern {
                mass: s.mass,
                weight: s.weight,
                density: density.clone(),
            }],
            total: density,
            method: PatternMethod::LabFrame,
            worldline: Some(worldline.descriptor()),
            reference_time: t_ref,
        })
        .collect();
    total_pattern(&parts, spectrum)
}

/// Outcome of comparing the lab and freely falling descriptions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub rms_pattern_diff: f64,
    pub delta_visibility: f64,
    pub visibility_lab: f64,
    pub visibility_lorentz: f64,
    pub pass: bool,
    pub g: f64,
    pub distance: f64,
    pub k0: f64,
    pub t_mean: f64,
    pub spectrum: SpectrumKind,
}

/// Runs the lab pipeline (static screen, falling packets) and the freely
/// falling pipeline (free packets, screen accelerating at `g`) and compares
/// the resulting patterns.
pub fn frame_equivalence_check(
    ini: &InitialState,
    axis: &GridAxis,
    spectrum: &MassSpectrum,
    model: &GravityModel,
    distance: f64,
) -> Result<EquivalenceReport> {
    let GravityModel::Eep { g } = model else {
        return Err(Error::Precondition(
            "frame equivalence only holds for a universal coupling".into(),
        ));
    };
    if g[0] != 0.0 || g[1] != 0.0 {
        return Err(Error::Precondition("field must point along z".into()));
    }
    let gz = g[2];
    let alpha = ini
        .fringe_wavenumber(distance)
        .ok_or_else(|| Error::Precondition("frame check needs a double-slit state".into()))?;
    let k0 = ini.k0();
    let last = spectrum
        .masses()
        .iter()
        .map(|m| crate::measurement::crossing_window(ini, *m, distance).map(|w| w.1))
        .try_fold(0.0, |acc: f64, w| w.map(|b| acc.max(b)))?;
    let screen = if gz == 0.0 {
        ScreenWorldline::rest(distance)?
    } else {
        ScreenWorldline::uniform_acceleration(gz, distance, last)?
    };
    let (lab, lorentz) = rayon::join(
        || lab_pattern(ini, axis, spectrum, model, distance, None),
        || pattern_full(ini, axis, spectrum, &screen),
    );
    let (lab, lorentz) = (lab?, lorentz?);
    let rms_pattern_diff = relative_rms(&lorentz.total, &lab.total)?;
    let visibility_lab = fit_visibility(&lab, alpha)?.visibility;
    let visibility_lorentz = fit_visibility(&lorentz, alpha)?.visibility;
    let delta_visibility = (visibility_lab - visibility_lorentz).abs();
    Ok(EquivalenceReport {
        rms_pattern_diff,
        delta_visibility,
        visibility_lab,
        visibility_lorentz,
        pass: rms_pattern_diff <= EQUIVALENCE_RMS && delta_visibility <= EQUIVALENCE_VISIBILITY,
        g: gz,
        distance,
        k0,
        t_mean: lab.reference_time,
        spectrum: spectrum.kind().clone(),
    })
}

/// `z_m(t) = (G_m,z / m) t² / 2` for every spectrum node.
pub fn eep_violation_separation(spectrum: &MassSpectrum, model: &GravityModel, t: f64) -> Result<Vec<f64>> {
    if model.is_eep() {
        return Err(Error::Precondition("separation needs a violating model".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidTime(t));
    }
    spectrum
        .species()
        .iter()
        .map(|s| model.acceleration(s.mass).map(|a| 0.5 * a[2] * t * t))
        .collect()
}

/// Closed-form uniform-force solution for a free packet: the free evolution
/// displaced by `a t² / 2` and boosted by `m a t`.
pub fn displaced_free_packet(psi: &WavefunctionGrid, mass: f64, accel: f64, t: f64) -> Result<WavefunctionGrid> {
    if psi.axes().len() != 1 {
        return Err(Error::arg("psi", "expected a one-dimensional packet"));
    }
    let free = wavepacket::fresnel_propagate(psi, mass, t)?;
    let shift = 0.5 * accel * t * t;
    let values = free.sample_shifted(&[-shift])?;
    let mut axis = free.axes()[0].clone();
    axis.carrier = 0.0;
    let boost = mass * accel * t;
    let data = axis
        .positions()
        .iter()
        .zip(values)
        .map(|(z, v)| v * Complex64::from_polar(1.0, boost * z))
        .collect();
    WavefunctionGrid::from_samples(vec![axis], data, wavepacket::Representation::Position)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::visibility::fit_visibility;
    use approx::assert_abs_diff_eq;

    fn gaussian(axis: &GridAxis, width: f64) -> WavefunctionGrid {
        WavefunctionGrid::from_position_fn(vec![axis.clone()], |r| {
            Complex64::new((-(r[0] * r[0]) / (2.0 * width * width)).exp(), 0.0)
        })
        .unwrap()
        .normalized()
        .unwrap()
    }

    #[test]
    fn heisenberg_examples() {
        let traj = HeisenbergTrajectory {
            x0: [0.0; 3],
            p0: [0.0, 10.0, 0.0],
            mass: 100.0,
            model: GravityModel::eep_z(1e-3),
        };
        let x = heisenberg_mean(&traj, 100.0).unwrap();
        assert_abs_diff_eq!(x[0], 0.0);
        assert_abs_diff_eq!(x[1], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[2], -5.0, epsilon = 1e-12);

        let free = HeisenbergTrajectory {
            model: GravityModel::eep_z(0.0),
            ..traj.clone()
        };
        assert_abs_diff_eq!(heisenberg_mean(&free, 7.0).unwrap()[1], 0.7, epsilon = 1e-15);

        let heavy = HeisenbergTrajectory {
            mass: 150.0,
            ..traj.clone()
        };
        let (a, b) = (heisenberg_mean(&traj, 30.0).unwrap(), heisenberg_mean(&heavy, 30.0).unwrap());
        assert_eq!(a[2], b[2]);
        assert_abs_diff_eq!(a[1] - b[1], 10.0 * 30.0 * (1.0 / 100.0 - 1.0 / 150.0), epsilon = 1e-12);
        assert!(matches!(heisenberg_mean(&traj, -1.0), Err(Error::InvalidTime(_))));
    }

    #[test]
    fn disguised_eep_matches_eep() {
        let eep = GravityModel::eep_z(2e-3);
        let dis = GravityModel::violating_equivalent([0.0, 0.0, 2e-3], &[10.0, 12.0]);
        for m in [10.0, 12.0] {
            assert_eq!(eep.acceleration(m).unwrap(), dis.acceleration(m).unwrap());
        }
        let s = MassSpectrum::discrete(&[(10.0, 0.5), (12.0, 0.5)]).unwrap();
        let z = eep_violation_separation(&s, &dis, 50.0).unwrap();
        assert_eq!(z[0], z[1]);
        assert!(eep_violation_separation(&s, &eep, 50.0).is_err());
    }

    #[test]
    fn violation_separation_example() {
        let model = GravityModel::violating_z(&[(10.0, 1e-3), (11.0, 1.1e-3)]);
        let s = MassSpectrum::discrete(&[(10.0, 0.5), (11.0, 0.5)]).unwrap();
        let z = eep_violation_separation(&s, &model, 100.0).unwrap();
        assert_abs_diff_eq!(z[1] - z[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn zero_field_is_free_evolution() {
        let axis = GridAxis::centered(AxisLabel::Z, 1024, 0.05).unwrap();
        let psi = gaussian(&axis, 1.0);
        let sp = Species::new(50.0, 1.0).unwrap();
        let lab = evolve_packet_lab(&psi, sp, &GravityModel::eep_z(0.0), 40.0).unwrap();
        let free = wavepacket::fresnel_propagate(&psi, 50.0, 40.0).unwrap();
        for (a, b) in lab.data().iter().zip(free.data()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_force_matches_displaced_gaussian() {
        let axis = GridAxis::centered(AxisLabel::Z, 2048, 0.05).unwrap();
        let width = 1.5;
        let psi = gaussian(&axis, width);
        let (m, g, t) = (200.0, 1e-3, 60.0);
        let sp = Species::new(m, 1.0).unwrap();
        let lab = evolve_packet_lab(&psi, sp, &GravityModel::eep_z(g), t).unwrap();
        // closed form: centre -g t²/2, amplitude width w √(1 + (t / m w²)²)
        let wt = width * (1.0 + (t / (m * width * width)).powi(2)).sqrt();
        let c = -0.5 * g * t * t;
        let positions = lab.axes()[0].positions();
        let peak = 1.0 / (std::f64::consts::PI.sqrt() * wt);
        for (z, rho) in positions.iter().zip(lab.density()) {
            let expected = peak * (-(z - c) * (z - c) / (wt * wt)).exp();
            assert_abs_diff_eq!(rho, expected, epsilon = 1e-10 * peak);
        }
        let oracle = displaced_free_packet(&psi, m, -g, t).unwrap();
        for (z, rho) in oracle.axes()[0].positions().iter().zip(oracle.density()) {
            let expected = peak * (-(z - c) * (z - c) / (wt * wt)).exp();
            assert_abs_diff_eq!(rho, expected, epsilon = 1e-10 * peak);
        }
    }

    #[test]
    fn ehrenfest_and_norm() {
        let axis = GridAxis::centered(AxisLabel::Z, 2048, 0.05).unwrap();
        let psi = gaussian(&axis, 1.0);
        let m = 100.0;
        let model = GravityModel::violating_z(&[(m, 1e-3)]);
        let traj = HeisenbergTrajectory {
            x0: [0.0; 3],
            p0: [0.0; 3],
            mass: m,
            model: model.clone(),
        };
        let sp = Species::new(m, 1.0).unwrap();
        for t in [0.0, 10.0, 35.0, 80.0] {
            let e = evolve_packet_lab(&psi, sp, &model, t).unwrap();
            let mean = heisenberg_mean(&traj, t).unwrap()[2];
            assert!((e.centroid(0) - mean).abs() <= 1e-3 * e.width(0));
            assert!((e.norm_sqr() - psi.norm_sqr()).abs() <= 1e-9);
        }
    }

    #[test]
    fn force_off_grid_rejected() {
        let axis = GridAxis::centered(AxisLabel::Z, 256, 0.1).unwrap();
        let psi = gaussian(&axis, 1.0);
        let sp = Species::new(100.0, 1.0).unwrap();
        let model = GravityModel::Eep { g: [0.0, 1e-3, 0.0] };
        assert!(matches!(
            evolve_packet_lab(&psi, sp, &model, 1.0),
            Err(Error::Precondition(_))
        ));
    }

    fn lab_setup() -> (InitialState, GridAxis) {
        let ini = InitialState::double_slit(0.5, -0.5, 0.02, 1.0, 0.5f64.sqrt(), 2000.0).unwrap();
        let axis = GridAxis::centered(AxisLabel::Z, 16384, 0.01).unwrap();
        (ini, axis)
    }

    #[test]
    fn single_species_keeps_full_visibility() {
        let (ini, axis) = lab_setup();
        let s = MassSpectrum::single(1e5).unwrap();
        // slow fall so the packet barely moves while it crosses the screen
        let p = lab_pattern(&ini, &axis, &s, &GravityModel::eep_z(1e-9), 1000.0, None).unwrap();
        let v = fit_visibility(&p, 2.0).unwrap();
        assert!((v.visibility - 1.0).abs() < 2e-3, "{}", v.visibility);
    }

    #[test]
    fn frame_check_rejects_violating_model() {
        let (ini, axis) = lab_setup();
        let s = MassSpectrum::single(1e5).unwrap();
        let model = GravityModel::violating_z(&[(1e5, 1e-7)]);
        assert!(matches!(
            frame_equivalence_check(&ini, &axis, &s, &model, 1000.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn frames_agree_for_two_species() {
        let (ini, axis) = lab_setup();
        let s = MassSpectrum::discrete(&[(1e5, 0.5), (1.005e5, 0.5)]).unwrap();
        let r = frame_equivalence_check(&ini, &axis, &s, &GravityModel::eep_z(1e-7), 1000.0).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.visibility_lab < 0.99);
        let zero = frame_equivalence_check(&ini, &axis, &s, &GravityModel::eep_z(0.0), 1000.0).unwrap();
        assert!(zero.rms_pattern_diff < 1e-6 && zero.delta_visibility < 1e-6, "{zero:?}");
    }
}
