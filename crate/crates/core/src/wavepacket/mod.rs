//! Initial states and free Schrödinger propagation of single-species packets.
//!
//! Propagation is spectral: the momentum amplitude is multiplied by
//! `exp(-i k² t / 2m)`. Free evolution depends on `t` and `m` only through
//! `s = t / m`, which is why the packet reaching the screen is the same for
//! every mass.

mod grid;
mod state;

pub use grid::{AxisLabel, GridAxis, Representation, WavefunctionGrid, ALIASING_TOLERANCE};
pub use state::{
    check_nonrelativistic, GaussianFactor, InitialState, Profile, Species, NONRELATIVISTIC_LIMIT,
    PARAXIAL_LIMIT, SLIT_RATIO_LIMIT,
};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Evolves a momentum amplitude for time `t` at mass `m` and returns the
/// position-space wavefunction. A position-space input is transformed first.
pub fn kspace_evolve(f: &WavefunctionGrid, m: f64, t: f64) -> Result<WavefunctionGrid> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::arg("m", format!("{m} must be positive")));
    }
    f.check_bandwidth()?;
    let mut k = f.to_momentum();
    evolve_momentum(&mut k, t / m);
    Ok(k.to_position())
}

/// Free propagation of a position-space packet by the Fresnel kernel
/// `sqrt(m / 2πit) ∫ exp(i m (x - x')² / 2t) ψ(x') dx'`, evaluated spectrally.
pub fn fresnel_propagate(psi: &WavefunctionGrid, m: f64, t: f64) -> Result<WavefunctionGrid> {
    kspace_evolve(psi, m, t)
}

/// Packet on the screen plane: the Fresnel transform of the z profile with
/// `s = L / k0`. No mass enters.
pub fn final_packet(ini: &InitialState, axis: &GridAxis, distance: f64) -> Result<WavefunctionGrid> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(Error::arg("L", format!("{distance} must be positive")));
    }
    let ratio = ini.packet_size() / distance;
    if ratio > PARAXIAL_LIMIT {
        return Err(Error::ParaxialViolated { ratio });
    }
    let psi = ini.z_profile(axis)?;
    psi.check_bandwidth()?;
    let mut k = psi.to_momentum();
    evolve_momentum(&mut k, distance / ini.k0());
    Ok(k.to_position())
}

/// `t_m = m L / k0`.
pub fn arrival_time(m: f64, k0: f64, distance: f64) -> Result<f64> {
    for (name, v) in [("m", m), ("k0", k0), ("L", distance)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::arg(name, format!("{v} must be positive")));
        }
    }
    Ok(m * distance / k0)
}

/// Applies `exp(-i k² s / 2)` with `k = carrier + q` on every axis and moves
/// each axis origin with the carrier group velocity so the envelope stays in
/// the box. Requires the momentum representation.
pub(crate) fn evolve_momentum(k: &mut WavefunctionGrid, s: f64) {
    debug_assert_eq!(k.repr(), Representation::Momentum);
    if s == 0.0 {
        return;
    }
    let tables: Vec<Vec<Complex64>> = k
        .axes()
        .iter()
        .map(|a| {
            let c = a.carrier;
            (0..a.points)
                .map(|j| {
                    let kk = c + a.wavenumber(j);
                    Complex64::from_polar(1.0, -0.5 * kk * kk * s)
                })
                .collect()
        })
        .collect();
    k.map_momentum_separable(&tables);
    for a in k.axes_mut() {
        // the stored amplitude is the absolute transform, so moving the origin
        // only relabels where the samples sit
        a.origin += a.carrier * s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn gaussian(n: usize, dz: f64, w: f64) -> WavefunctionGrid {
        let axis = GridAxis::centered(AxisLabel::Z, n, dz).unwrap();
        WavefunctionGrid::from_position_fn(vec![axis], |r| {
            Complex64::new((-(r[0] * r[0]) / (2.0 * w * w)).exp(), 0.0)
        })
        .unwrap()
        .normalized()
        .unwrap()
    }

    fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_time_is_identity() {
        let psi = gaussian(512, 0.05, 1.0);
        let out = kspace_evolve(&psi.to_momentum(), 100.0, 0.0).unwrap();
        assert!(max_diff(out.data(), psi.data()) < 1e-13);
    }

    #[test]
    fn gaussian_width_follows_free_spreading() {
        // amplitude width w(t) = w0 sqrt(1 + (t / m w0²)²); |ψ|² std is w/√2
        let psi = gaussian(2048, 0.05, 1.0);
        let m = 100.0;
        for t in [10.0, 100.0, 1000.0] {
            let out = kspace_evolve(&psi, m, t).unwrap();
            let expected = (1.0 + (t / m).powi(2)).sqrt() / 2f64.sqrt();
            let got = out.width(0);
            assert!((got / expected - 1.0).abs() < 1e-6, "t={t}: {got} vs {expected}");
            assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);
        }
        let out = kspace_evolve(&psi, m, 100.0).unwrap();
        assert_abs_diff_eq!(out.width(0) * 2f64.sqrt(), 2f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn semigroup() {
        let axis = GridAxis::centered(AxisLabel::Z, 1024, 0.02).unwrap();
        let ini = InitialState::double_slit(0.5, -0.5, 0.05, 1.0, 1.0, 10.0).unwrap();
        let psi = ini.z_profile(&axis).unwrap();
        let once = kspace_evolve(&psi, 1.0, 0.05).unwrap();
        let twice = kspace_evolve(&kspace_evolve(&psi, 1.0, 0.025).unwrap(), 1.0, 0.025).unwrap();
        assert!(max_diff(once.data(), twice.data()) < 1e-10);
    }

    #[test]
    fn invalid_time_and_aliasing() {
        let psi = gaussian(256, 0.1, 1.0);
        assert!(matches!(kspace_evolve(&psi, 1.0, -1.0), Err(Error::InvalidTime(_))));
        let sharp = gaussian(256, 0.1, 0.05);
        assert!(matches!(kspace_evolve(&sharp, 1.0, 1.0), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn fresnel_matches_direct_kernel_quadrature() {
        // coarse grid, double slit; the kernel sum is spectrally accurate for
        // Gaussian slits so it serves as an independent oracle
        let (n, dz) = (1024, 0.01);
        let axis = GridAxis::centered(AxisLabel::Z, n, dz).unwrap();
        let ini = InitialState::double_slit(0.25, -0.25, 0.05, 1.0, 1.0, 10.0).unwrap();
        let psi = ini.z_profile(&axis).unwrap();
        let (m, t) = (2.0, 0.1);
        let out = fresnel_propagate(&psi, m, t).unwrap();
        let z = axis.positions();
        let pre = (Complex64::new(m, 0.0) / Complex64::new(0.0, 2.0 * PI * t)).sqrt();
        let peak = out.data().iter().map(|c| c.norm()).fold(0.0, f64::max);
        for j in (0..n).filter(|&j| z[j].abs() < 3.0).step_by(7) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (zp, v) in z.iter().zip(psi.data()) {
                let d = z[j] - zp;
                acc += v * Complex64::from_polar(1.0, m * d * d / (2.0 * t));
            }
            let direct = pre * acc * dz;
            assert!((direct - out.data()[j]).norm() < 1e-9 * peak, "z={}", z[j]);
        }
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn arrival_packet_is_mass_independent() {
        let axis = GridAxis::centered(AxisLabel::Z, 2048, 0.01).unwrap();
        let k0 = 100.0;
        let l = 50.0;
        let ini = InitialState::double_slit(0.5, -0.5, 0.03, 0.2, 0.2, k0).unwrap();
        let psi = ini.z_profile(&axis).unwrap();
        let a = kspace_evolve(&psi, 1000.0, arrival_time(1000.0, k0, l).unwrap()).unwrap();
        let b = kspace_evolve(&psi, 2000.0, arrival_time(2000.0, k0, l).unwrap()).unwrap();
        let peak = a.data().iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(max_diff(a.data(), b.data()) <= 1e-8 * peak);
        let fin = final_packet(&ini, &axis, l).unwrap();
        assert!(max_diff(a.data(), fin.data()) <= 1e-8 * peak);
    }

    #[test]
    fn final_packet_gaussian_broadening() {
        let axis = GridAxis::centered(AxisLabel::Z, 4096, 0.02).unwrap();
        let (w, k0, l) = (0.5, 20.0, 40.0);
        let ini = InitialState::new(Profile::Gaussian { center: 0.3, width: w }, 0.5, 0.5, k0).unwrap();
        let out = final_packet(&ini, &axis, l).unwrap();
        let s = l / k0;
        let ws = w * (1.0 + (s / (w * w)).powi(2)).sqrt();
        for (z, c) in axis.positions().iter().zip(out.data()) {
            let exact = (PI * ws * ws).powf(-0.25) * (-(z - 0.3).powi(2) / (2.0 * ws * ws)).exp();
            assert!((c.norm() - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn final_packet_checks_paraxial_limit() {
        let axis = GridAxis::centered(AxisLabel::Z, 256, 0.05).unwrap();
        let ini = InitialState::double_slit(0.5, -0.5, 0.05, 0.1, 0.1, 10.0).unwrap();
        assert!(matches!(
            final_packet(&ini, &axis, 5.0),
            Err(Error::ParaxialViolated { .. })
        ));
    }

    #[test]
    fn arrival_time_examples() {
        assert_abs_diff_eq!(arrival_time(100.0, 10.0, 50.0).unwrap(), 500.0);
        let t1 = arrival_time(3.0, 7.0, 11.0).unwrap();
        let t2 = arrival_time(6.0, 7.0, 11.0).unwrap();
        assert_abs_diff_eq!(t2 / t1, 2.0, epsilon = 1e-15);
        assert!(arrival_time(0.0, 1.0, 1.0).is_err());
        assert!(arrival_time(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn carrier_moves_envelope() {
        let mut axis = GridAxis::centered(AxisLabel::Z, 512, 0.05).unwrap();
        axis.carrier = 3.0;
        let psi = WavefunctionGrid::from_samples(
            vec![axis.clone()],
            gaussian(512, 0.05, 1.0).data().to_vec(),
            Representation::Position,
        )
        .unwrap();
        let out = kspace_evolve(&psi, 10.0, 5.0).unwrap();
        // group velocity carrier / m = 0.3
        assert_abs_diff_eq!(out.centroid(0), 1.5, epsilon = 1e-10);
    }
}
