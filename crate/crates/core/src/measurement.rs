//! Particle counts per proper area on the screen.
//!
//! Two routes give the count density `σ_m(Z)` of each species: the full flux
//! integral over the crossing time, and the rigid translation of the arrival
//! packet by the screen displacement at `t_m`. The x factor is integrated out,
//! so densities are per unit `Z` and each species integrates to about one.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::visibility::MassSpectrum;
use crate::wavepacket::{
    self, check_nonrelativistic, GaussianFactor, GridAxis, InitialState, Species, WavefunctionGrid,
};
use crate::worldline::{ProperFramePoint, ScreenWorldline, WorldlineDescriptor};

/// Largest `β²` for which the shifted-pattern route is accepted.
pub const MAX_SHIFTED_BETA_SQ: f64 = 1e-3;
/// Half-width of the crossing window in amplitude widths of the beam-axis packet.
pub const CROSSING_HALF_WIDTHS: f64 = 6.0;
pub const MIN_TIME_STEPS: usize = 64;
/// Refinement stops once the pattern changes by less than this fraction of its peak.
pub const TIME_REFINEMENT_TOLERANCE: f64 = 1e-3;
const MAX_TIME_STEPS: usize = 1 << 14;
/// Samples below this fraction of the peak are excluded from RMS comparisons.
pub const SUPPORT_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternMethod {
    FullFlux,
    ShiftedPattern,
    LabFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesPattern {
    pub mass: f64,
    pub weight: f64,
    pub density: Vec<f64>,
}

/// Count density over the screen coordinate `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub z: Vec<f64>,
    pub species: Vec<SpeciesPattern>,
    pub total: Vec<f64>,
    pub method: PatternMethod,
    pub worldline: Option<WorldlineDescriptor>,
    /// Time at which the `Z` grid is anchored to the packet grid.
    pub reference_time: f64,
}

impl Pattern {
    pub fn spacing(&self) -> f64 {
        if self.z.len() < 2 {
            0.0
        } else {
            self.z[1] - self.z[0]
        }
    }

    pub fn peak(&self) -> f64 {
        self.total.iter().copied().fold(0.0, f64::max)
    }

    /// `∫ σ dZ` for the total density.
    pub fn integrated(&self) -> f64 {
        self.total.iter().sum::<f64>() * self.spacing()
    }

    /// `∫ σ_m dZ` for each species, unweighted.
    pub fn integrated_species(&self) -> Vec<f64> {
        let h = self.spacing();
        self.species
            .iter()
            .map(|s| s.density.iter().sum::<f64>() * h)
            .collect()
    }

    /// CSV with columns `Z, sigma_total, sigma_m<mass>...`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "Z,sigma_total")?;
        for s in &self.species {
            write!(out, ",sigma_m{}", s.mass)?;
        }
        writeln!(out)?;
        for (j, z) in self.z.iter().enumerate() {
            write!(out, "{:.11e},{:.11e}", z, self.total[j])?;
            for s in &self.species {
                write!(out, ",{:.11e}", s.density[j])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// Probability density of a packet at a Minkowski event `(t, x, y, z)`.
pub trait DensityField {
    fn density(&self, event: [f64; 4]) -> Result<f64>;
}

impl<F: Fn([f64; 4]) -> f64> DensityField for F {
    fn density(&self, event: [f64; 4]) -> Result<f64> {
        Ok(self(event))
    }
}

/// Separable packet: sampled z factor at one instant, analytic x and y factors.
pub struct SeparableSnapshot<'a> {
    pub psi_z: &'a WavefunctionGrid,
    pub x: GaussianFactor,
    pub y: GaussianFactor,
    pub mass: f64,
    pub k0: f64,
}

impl DensityField for SeparableSnapshot<'_> {
    fn density(&self, e: [f64; 4]) -> Result<f64> {
        let v = self.k0 / self.mass;
        let psi = self.psi_z.amplitude_at(&[e[3]])?;
        Ok(self.x.density(self.mass, 0.0, e[0], e[1])
            * self.y.density(self.mass, v, e[0], e[2])
            * psi.norm_sqr())
    }
}

/// Count rate per proper area per coordinate time at pixel `(X, Z)`:
/// `v (1 + g Z) |ψ|²` evaluated at the Minkowski image of the pixel.
pub fn flux_rate<F: DensityField>(
    field: &F,
    velocity: f64,
    w: &ScreenWorldline,
    pixel: (f64, f64),
    t: f64,
) -> Result<f64> {
    let tau = w.proper_time(t)?;
    let event = w.proper_to_minkowski(ProperFramePoint::new(tau, pixel.0, 0.0, pixel.1))?;
    let g = w.proper_acceleration(t)?;
    Ok(velocity * (1.0 + g * pixel.1) * field.density(event)?)
}

fn pattern_z(axis: &GridAxis, offset: f64) -> Vec<f64> {
    axis.positions().iter().map(|z| z - offset).collect()
}

fn single(
    z: Vec<f64>,
    species: Species,
    density: Vec<f64>,
    method: PatternMethod,
    w: Option<WorldlineDescriptor>,
    t_ref: f64,
) -> Pattern {
    Pattern {
        z,
        species: vec![SpeciesPattern {
            mass: species.mass,
            weight: species.weight,
            density: density.clone(),
        }],
        total: density,
        method,
        worldline: w,
        reference_time: t_ref,
    }
}

/// Rigid translation of the arrival packet: `σ_m(Z) = |ψ_fin(z̃(t_m) + Z)|²`.
/// The `Z` grid is the packet grid shifted by `z̃(t_ref)`.
pub fn integrate_pattern_shifted(
    psi_fin: &WavefunctionGrid,
    species: Species,
    w: &ScreenWorldline,
    k0: f64,
    t_ref: f64,
) -> Result<Pattern> {
    if psi_fin.axes().len() != 1 {
        return Err(Error::arg("psi_fin", "expected the one-dimensional z factor"));
    }
    let t_m = wavepacket::arrival_time(species.mass, k0, w.distance())?;
    let beta_sq = w.max_beta_sq(t_m, t_m)?;
    if beta_sq >= MAX_SHIFTED_BETA_SQ {
        return Err(Error::UseFullFlux { beta_sq });
    }
    let offset = w.z_of_t(t_ref)?;
    let d = w.z_of_t(t_m)? - offset;
    let density: Vec<f64> = psi_fin
        .sample_shifted(&[d])?
        .iter()
        .map(|c| c.norm_sqr())
        .collect();
    let z = pattern_z(&psi_fin.axes()[0], offset);
    Ok(single(
        z,
        species,
        density,
        PatternMethod::ShiftedPattern,
        Some(w.descriptor()),
        t_ref,
    ))
}

/// Crossing window `t_m ± 6 w_y(t_m) / v_m` of a species.
pub fn crossing_window(ini: &InitialState, mass: f64, distance: f64) -> Result<(f64, f64)> {
    let t_m = wavepacket::arrival_time(mass, ini.k0(), distance)?;
    let v = ini.k0() / mass;
    let half = CROSSING_HALF_WIDTHS * ini.y_factor().width_at(mass, t_m) / v;
    Ok((t_m - half, t_m + half))
}

/// Composite trapezoid over `[a, b]` of a vector-valued integrand, doubling
/// the step count from [`MIN_TIME_STEPS`] until the result moves by less than
/// [`TIME_REFINEMENT_TOLERANCE`] of its peak.
pub(crate) fn integrate_window<F>(a: f64, b: f64, f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let mut n = MIN_TIME_STEPS;
    let mut h = (b - a) / n as f64;
    let mut sum = f(a)?;
    for (s, e) in sum.iter_mut().zip(f(b)?) {
        *s = 0.5 * (*s + e);
    }
    for i in 1..n {
        add(&mut sum, &f(a + i as f64 * h)?);
    }
    let mut estimate: Vec<f64> = sum.iter().map(|s| s * h).collect();
    loop {
        if n >= MAX_TIME_STEPS {
            return Err(Error::NotConverged(format!(
                "crossing integral still changing after {n} steps"
            )));
        }
        for i in 0..n {
            add(&mut sum, &f(a + (i as f64 + 0.5) * h)?);
        }
        n *= 2;
        h *= 0.5;
        let next: Vec<f64> = sum.iter().map(|s| s * h).collect();
        let peak = next.iter().copied().fold(0.0, f64::max);
        let change = next
            .iter()
            .zip(&estimate)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        estimate = next;
        if change <= TIME_REFINEMENT_TOLERANCE * peak {
            return Ok(estimate);
        }
    }
}

fn add(acc: &mut [f64], v: &[f64]) {
    acc.iter_mut().zip(v).for_each(|(a, b)| *a += b);
}

/// Free packet of one species with values (and optionally slopes) sampled at
/// shifted grid positions.
pub(crate) struct FreePacket {
    k: WavefunctionGrid,
    mass: f64,
}

impl FreePacket {
    pub(crate) fn new(psi: &WavefunctionGrid, mass: f64) -> Result<Self> {
        psi.check_bandwidth()?;
        Ok(Self {
            k: psi.to_momentum(),
            mass,
        })
    }

    /// `ψ(t, z_j + d)` on the original grid positions `z_j`, with slopes when
    /// requested.
    pub(crate) fn sample(&self, t: f64, d: f64, slopes: bool) -> Result<Samples> {
        let mut e = self.k.clone();
        wavepacket::evolve_momentum(&mut e, t / self.mass);
        sample_evolved(e, self.k.axes()[0].origin, d, slopes)
    }
}

pub(crate) type Samples = (Vec<Complex64>, Option<Vec<Complex64>>);

/// Samples an evolved one-dimensional packet (momentum representation) at
/// `origin + j h + d`, where `origin` is where its grid started.
pub(crate) fn sample_evolved(mut e: WavefunctionGrid, origin: f64, d: f64, slopes: bool) -> Result<Samples> {
    let shift = d - (e.axes()[0].origin - origin);
    // positions off the evolved grid would see periodic images
    let n = e.axes()[0].points as isize;
    let cells = (shift / e.axes()[0].spacing).round() as isize;
    let clip = |mut v: Vec<Complex64>| {
        v.iter_mut()
            .enumerate()
            .filter(|(j, _)| !(0..n).contains(&(*j as isize + cells)))
            .for_each(|(_, c)| *c = Complex64::new(0.0, 0.0));
        v
    };
    let values = clip(e.sample_shifted(&[shift])?);
    if !slopes {
        return Ok((values, None));
    }
    let axis = e.axes()[0].clone();
    let table: Vec<Complex64> = (0..axis.points)
        .map(|j| Complex64::new(0.0, axis.carrier + axis.wavenumber(j)))
        .collect();
    e.map_momentum_separable(&[table]);
    let d1 = clip(e.sample_shifted(&[shift])?);
    Ok((values, Some(d1)))
}

/// Cubic Hermite interpolation of complex samples at fractional index `p`.
fn hermite(values: &[Complex64], slopes: &[Complex64], h: f64, p: f64) -> Complex64 {
    let n = values.len();
    if !(0.0..=(n - 1) as f64).contains(&p) {
        return Complex64::new(0.0, 0.0);
    }
    let j = (p.floor() as usize).min(n - 2);
    let u = p - j as f64;
    let (h00, h10, h01, h11) = (
        2.0 * u.powi(3) - 3.0 * u * u + 1.0,
        u.powi(3) - 2.0 * u * u + u,
        -2.0 * u.powi(3) + 3.0 * u * u,
        u.powi(3) - u * u,
    );
    values[j] * h00 + slopes[j] * (h10 * h) + values[j + 1] * h01 + slopes[j + 1] * (h11 * h)
}

/// Full flux integral
/// `σ_m(Z) = v_m ∫ γ |ψ_y(t, L)|² |ψ_z(t, z̃(t) + Z/γ)|² dt` over the
/// crossing window, with the z factor propagated to every quadrature time.
pub fn integrate_pattern_full(
    ini: &InitialState,
    axis: &GridAxis,
    species: Species,
    w: &ScreenWorldline,
    t_ref: f64,
) -> Result<Pattern> {
    let m = species.mass;
    let k0 = ini.k0();
    check_nonrelativistic(k0, [m])?;
    let distance = w.distance();
    let ratio = ini.packet_size() / distance;
    if ratio > wavepacket::PARAXIAL_LIMIT {
        return Err(Error::ParaxialViolated { ratio });
    }
    let (a, b) = crossing_window(ini, m, distance)?;
    if !(w.contains(a) && w.contains(b)) {
        return Err(Error::ScreenNotPresent { start: a, end: b });
    }
    let offset = w.z_of_t(t_ref)?;
    let packet = FreePacket::new(&ini.z_profile(axis)?, m)?;
    let z = pattern_z(axis, offset);
    let zmax = z.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let v = k0 / m;
    let y = ini.y_factor();
    let h = axis.spacing;
    let sigma = integrate_window(a, b, |t| {
        let (_, gamma) = w.beta_gamma(t)?;
        let d = w.z_of_t(t)? - offset;
        let weight = v * gamma * y.density(m, v, t, distance);
        let stretch = 1.0 / gamma - 1.0;
        if zmax * stretch.abs() < 1e-9 * h {
            let (vals, _) = packet.sample(t, d, false)?;
            return Ok(vals.iter().map(|c| weight * c.norm_sqr()).collect());
        }
        let (vals, slopes) = packet.sample(t, d, true)?;
        let slopes = slopes.expect("requested");
        Ok(z
            .iter()
            .enumerate()
            .map(|(j, zj)| {
                let p = j as f64 + zj * stretch / h;
                weight * hermite(&vals, &slopes, h, p).norm_sqr()
            })
            .collect())
    })?;
    Ok(single(
        z,
        species,
        sigma,
        PatternMethod::FullFlux,
        Some(w.descriptor()),
        t_ref,
    ))
}

/// `σ(Z) = Σ p_i σ_i(Z)` over the spectrum nodes.
pub fn total_pattern(patterns: &[Pattern], spectrum: &MassSpectrum) -> Result<Pattern> {
    let nodes = spectrum.species();
    if patterns.len() != nodes.len() {
        return Err(Error::GridMismatch(format!(
            "{} patterns for {} spectrum nodes",
            patterns.len(),
            nodes.len()
        )));
    }
    let first = &patterns[0];
    let scale = first.z.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut total = vec![0.0; first.z.len()];
    let mut species = Vec::with_capacity(nodes.len());
    for (p, node) in patterns.iter().zip(&nodes) {
        if p.z.len() != first.z.len()
            || p.z.iter().zip(&first.z).any(|(a, b)| (a - b).abs() > 1e-12 * scale)
        {
            return Err(Error::GridMismatch("species patterns sit on different Z grids".into()));
        }
        let [sp] = p.species.as_slice() else {
            return Err(Error::GridMismatch("expected single-species patterns".into()));
        };
        if (sp.mass - node.mass).abs() > 1e-12 * node.mass {
            return Err(Error::GridMismatch(format!(
                "pattern mass {} does not match spectrum node {}",
                sp.mass, node.mass
            )));
        }
        add_scaled(&mut total, &sp.density, node.weight);
        species.push(SpeciesPattern {
            mass: node.mass,
            weight: node.weight,
            density: sp.density.clone(),
        });
    }
    Ok(Pattern {
        z: first.z.clone(),
        species,
        total,
        method: first.method,
        worldline: first.worldline.clone(),
        reference_time: first.reference_time,
    })
}

fn add_scaled(acc: &mut [f64], v: &[f64], w: f64) {
    acc.iter_mut().zip(v).for_each(|(a, b)| *a += w * b);
}

/// Shifted-pattern route for every spectrum node, anchored at `t_m̄`.
pub fn pattern_shifted(
    ini: &InitialState,
    axis: &GridAxis,
    spectrum: &MassSpectrum,
    w: &ScreenWorldline,
) -> Result<Pattern> {
    check_nonrelativistic(ini.k0(), spectrum.masses())?;
    let fin = wavepacket::final_packet(ini, axis, w.distance())?;
    let t_ref = wavepacket::arrival_time(spectrum.mean(), ini.k0(), w.distance())?;
    let parts = spectrum
        .species()
        .par_iter()
        .map(|s| integrate_pattern_shifted(&fin, *s, w, ini.k0(), t_ref))
        .collect::<Result<Vec<_>>>()?;
    total_pattern(&parts, spectrum)
}

/// Full-flux route for every spectrum node, anchored at `t_m̄`.
pub fn pattern_full(
    ini: &InitialState,
    axis: &GridAxis,
    spectrum: &MassSpectrum,
    w: &ScreenWorldline,
) -> Result<Pattern> {
    let t_ref = wavepacket::arrival_time(spectrum.mean(), ini.k0(), w.distance())?;
    let parts = spectrum
        .species()
        .par_iter()
        .map(|s| integrate_pattern_full(ini, axis, *s, w, t_ref))
        .collect::<Result<Vec<_>>>()?;
    total_pattern(&parts, spectrum)
}

/// RMS of `a - b` over the support of `a`, relative to the peak of `a`.
pub fn relative_rms(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch("patterns differ in length".into()));
    }
    let peak = a.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::arg("pattern", "empty reference pattern"));
    }
    let (sum, count) = a
        .iter()
        .zip(b)
        .filter(|(x, _)| **x >= SUPPORT_FRACTION * peak)
        .fold((0.0, 0usize), |(s, c), (x, y)| (s + (x - y).powi(2), c + 1));
    Ok((sum / count as f64).sqrt() / peak)
}

/// Lag `D` maximizing `Σ reference(Z + D) other(Z)`; if `other` is `reference`
/// translated so that `other(Z) = reference(Z + D)`, this returns `D` to within
/// one grid cell.
pub fn pattern_lag(reference: &[f64], other: &[f64], spacing: f64) -> Result<f64> {
    let n = reference.len();
    if other.len() != n || n == 0 {
        return Err(Error::GridMismatch("patterns differ in length".into()));
    }
    let len = (2 * n).next_power_of_two();
    let pad = |v: &[f64]| -> Vec<Complex64> {
        v.iter()
            .map(|x| Complex64::new(*x, 0.0))
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(len)
            .collect()
    };
    let mut fa = pad(reference);
    let mut fb = pad(other);
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut fa);
    planner.plan_fft_forward(len).process(&mut fb);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(a, b)| a * b.conj()).collect();
    planner.plan_fft_inverse(len).process(&mut prod);
    // prod[k] = Σ_j reference[j + k] other[j], k taken modulo len
    let (best, _) = prod
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.re.total_cmp(&b.1.re))
        .expect("non-empty");
    let lag = if best < len / 2 { best as f64 } else { best as f64 - len as f64 };
    Ok(lag * spacing)
}
