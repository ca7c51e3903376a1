use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::{GridAxis, WavefunctionGrid};
use crate::error::{Error, Result};

/// Largest `k0 / m` accepted anywhere in the pipeline.
pub const NONRELATIVISTIC_LIMIT: f64 = 0.1;
/// Largest `packet size / L` accepted by [`final_packet`](super::final_packet).
pub const PARAXIAL_LIMIT: f64 = 0.1;
/// Largest slit width relative to the slit separation.
pub const SLIT_RATIO_LIMIT: f64 = 0.1;

/// One rest-mass component of the beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Species {
    pub mass: f64,
    pub weight: f64,
}

impl Species {
    pub fn new(mass: f64, weight: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::arg("mass", format!("{mass} must be positive")));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::arg("weight", format!("{weight} not in [0, 1]")));
        }
        Ok(Self { mass, weight })
    }

    /// Group velocity `k0 / m` along the beam.
    pub fn velocity(&self, k0: f64) -> f64 {
        k0 / self.mass
    }
}

/// Transverse profile along z at the slits. Widths use the amplitude
/// convention `ψ ∝ exp(-(z - c)² / (2 w²))`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    DoubleSlit { z1: f64, z2: f64, epsilon: f64 },
    Gaussian { center: f64, width: f64 },
    /// Pre-sampled z profile on its own grid.
    Custom(WavefunctionGrid),
}

/// Gaussian amplitude factor along one of the analytic axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFactor {
    pub width: f64,
    pub center: f64,
}

impl GaussianFactor {
    /// Width after free evolution for time `t` at mass `m`.
    pub fn width_at(&self, m: f64, t: f64) -> f64 {
        let w = self.width;
        w * (1.0 + (t / (m * w * w)).powi(2)).sqrt()
    }

    /// `|ψ|²` at `pos`, time `t`, for a packet whose centre moves with `velocity`.
    pub fn density(&self, m: f64, velocity: f64, t: f64, pos: f64) -> f64 {
        let w = self.width_at(m, t);
        let d = pos - self.center - velocity * t;
        (-(d * d) / (w * w)).exp() / (PI.sqrt() * w)
    }
}

/// Separable initial wavefunction: analytic Gaussians along x and y, a
/// sampled profile along z, and a carrier `k0` along y.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    profile: Profile,
    x: GaussianFactor,
    y: GaussianFactor,
    k0: f64,
}

impl InitialState {
    pub fn new(profile: Profile, width_x: f64, width_y: f64, k0: f64) -> Result<Self> {
        match &profile {
            Profile::DoubleSlit { z1, z2, epsilon } => {
                if !(*epsilon > 0.0) {
                    return Err(Error::arg("epsilon", format!("{epsilon} must be positive")));
                }
                let sep = (z1 - z2).abs();
                if !(sep > 0.0) || !sep.is_finite() {
                    return Err(Error::arg("z1", "slit centres must be distinct and finite"));
                }
                if *epsilon > SLIT_RATIO_LIMIT * sep {
                    return Err(Error::arg(
                        "epsilon",
                        format!("{epsilon} is not small against the slit separation {sep}"),
                    ));
                }
            }
            Profile::Gaussian { center, width } => {
                if !(*width > 0.0) || !center.is_finite() {
                    return Err(Error::arg("width", format!("{width} must be positive")));
                }
            }
            Profile::Custom(grid) => {
                if grid.axes().len() != 1 {
                    return Err(Error::arg("profile", "custom profile must be one-dimensional"));
                }
            }
        }
        for (name, w) in [("width_x", width_x), ("width_y", width_y)] {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::arg(name, format!("{w} must be positive")));
            }
        }
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(Error::arg("k0", format!("{k0} must be positive")));
        }
        Ok(Self {
            profile,
            x: GaussianFactor {
                width: width_x,
                center: 0.0,
            },
            y: GaussianFactor {
                width: width_y,
                center: 0.0,
            },
            k0,
        })
    }

    pub fn double_slit(z1: f64, z2: f64, epsilon: f64, width_x: f64, width_y: f64, k0: f64) -> Result<Self> {
        Self::new(Profile::DoubleSlit { z1, z2, epsilon }, width_x, width_y, k0)
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn x_factor(&self) -> GaussianFactor {
        self.x
    }

    pub fn y_factor(&self) -> GaussianFactor {
        self.y
    }

    /// `z1 - z2` for the double slit.
    pub fn slit_separation(&self) -> Option<f64> {
        match self.profile {
            Profile::DoubleSlit { z1, z2, .. } => Some(z1 - z2),
            _ => None,
        }
    }

    /// Fringe wavenumber `|k0 (z1 - z2) / L|` of the double-slit pattern.
    pub fn fringe_wavenumber(&self, distance: f64) -> Option<f64> {
        self.slit_separation().map(|d| (self.k0 * d / distance).abs())
    }

    /// Characteristic extent of the packet, compared against `L` for the
    /// paraxial check.
    pub fn packet_size(&self) -> f64 {
        let z = match &self.profile {
            Profile::DoubleSlit { z1, z2, epsilon } => (z1 - z2).abs() + 2.0 * epsilon,
            Profile::Gaussian { width, .. } => 2.0 * width,
            Profile::Custom(grid) => 2.0 * 2f64.sqrt() * grid.width(0),
        };
        z.max(2.0 * self.x.width).max(2.0 * self.y.width)
    }

    /// Fails unless `k0 / m < 0.1` for every mass.
    pub fn check_nonrelativistic<I: IntoIterator<Item = f64>>(&self, masses: I) -> Result<()> {
        check_nonrelativistic(self.k0, masses)
    }

    /// Normalized z profile sampled on `axis`.
    pub fn z_profile(&self, axis: &GridAxis) -> Result<WavefunctionGrid> {
        match &self.profile {
            Profile::DoubleSlit { z1, z2, epsilon } => {
                let (z1, z2, e) = (*z1, *z2, *epsilon);
                WavefunctionGrid::from_position_fn(vec![axis.clone()], |r| {
                    let a = (-(r[0] - z1).powi(2) / (2.0 * e * e)).exp();
                    let b = (-(r[0] - z2).powi(2) / (2.0 * e * e)).exp();
                    Complex64::new(a + b, 0.0)
                })?
                .normalized()
            }
            Profile::Gaussian { center, width } => {
                let (c, w) = (*center, *width);
                WavefunctionGrid::from_position_fn(vec![axis.clone()], |r| {
                    Complex64::new((-(r[0] - c).powi(2) / (2.0 * w * w)).exp(), 0.0)
                })?
                .normalized()
            }
            Profile::Custom(grid) => {
                let own = &grid.axes()[0];
                if own.points != axis.points || (own.spacing - axis.spacing).abs() > 1e-12 * axis.spacing {
                    return Err(Error::GridMismatch(format!(
                        "custom profile has {} points at spacing {}, requested {} at {}",
                        own.points, own.spacing, axis.points, axis.spacing
                    )));
                }
                grid.to_position().normalized()
            }
        }
    }
}

pub fn check_nonrelativistic<I: IntoIterator<Item = f64>>(k0: f64, masses: I) -> Result<()> {
    for m in masses {
        if !(m > 0.0) {
            return Err(Error::arg("mass", format!("{m} must be positive")));
        }
        let ratio = k0 / m;
        if ratio >= NONRELATIVISTIC_LIMIT {
            return Err(Error::NonRelativistic { ratio });
        }
    }
    Ok(())
}
