//! Desk-scale regimes shared by the integration tests.
//!
//! Every regime keeps the slit geometry fixed (Δz = 1, ε = 0.01) and sweeps the
//! mean arrival time by moving the screen at fixed k0, so `s = L / k0` sets
//! the Fresnel scale. At the decoherence time `s = 0.1`.
#![allow(dead_code)]

use matterwave::visibility::MassSpectrum;
use matterwave::wavepacket::{AxisLabel, GridAxis, InitialState};
use matterwave::worldline::ScreenWorldline;

pub const K0: f64 = 5000.0;
pub const SEPARATION: f64 = 1.0;
pub const SLIT_WIDTH: f64 = 0.01;
pub const WIDTH_X: f64 = 1.0;
pub const WIDTH_Y: f64 = 0.3;
pub const POINTS: usize = 32768;
pub const SPACING: f64 = 0.005;

pub fn initial_state() -> InitialState {
    InitialState::double_slit(
        0.5 * SEPARATION,
        -0.5 * SEPARATION,
        SLIT_WIDTH,
        WIDTH_X,
        WIDTH_Y,
        K0,
    )
    .unwrap()
}

pub fn axis() -> GridAxis {
    GridAxis::centered(AxisLabel::Z, POINTS, SPACING).unwrap()
}

/// Thermal spectrum with a uniform field tuned so the decoherence time sits
/// at `s = 0.1`.
#[derive(Debug, Clone)]
pub struct Thermal {
    pub n: f64,
    pub kt: f64,
    pub mean: f64,
    pub g: f64,
    pub tau: f64,
}

impl Thermal {
    /// `Δm / m̄ = spread`.
    pub fn new(n: f64, kt: f64, spread: f64) -> Self {
        let std = kt * n.sqrt();
        let mean = std / spread;
        let tau = 0.1 * mean;
        // oracle: τ = √(2/N) / (kT g Δz)
        let g = (2.0 / n).sqrt() / (kt * tau * SEPARATION);
        Self { n, kt, mean, g, tau }
    }

    pub fn n2() -> Self {
        Self::new(2.0, 1000.0, 0.01)
    }

    pub fn n10() -> Self {
        Self::new(10.0, 300.0, 0.005)
    }

    pub fn std(&self) -> f64 {
        self.kt * self.n.sqrt()
    }

    pub fn spectrum(&self) -> MassSpectrum {
        MassSpectrum::thermal(self.mean - self.n * self.kt, self.n, self.kt).unwrap()
    }

    pub fn gaussian(&self) -> MassSpectrum {
        MassSpectrum::gaussian(self.mean, self.std()).unwrap()
    }
}

/// Screen distance that puts the mean arrival at `t`.
pub fn distance_for(t: f64, mean_mass: f64) -> f64 {
    t * K0 / mean_mass
}

pub fn fringe_wavenumber(distance: f64) -> f64 {
    K0 * SEPARATION / distance
}

/// Uniformly accelerating screen valid well past every arrival.
pub fn accelerating(g: f64, distance: f64) -> ScreenWorldline {
    if g == 0.0 {
        ScreenWorldline::rest(distance).unwrap()
    } else {
        ScreenWorldline::uniform_acceleration(g, distance, 0.5 / g.abs()).unwrap()
    }
}
