//! Transverse trajectory of the detector screen and its proper reference frame.
//!
//! The screen plane sits at `y = L`. Its central pixel moves along z as
//! `z̃(t)`, a function of Minkowski coordinate time.

mod spline;

pub use spline::CubicSpline;

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance in coordinate time for the τ → t inversion.
pub const TIME_INVERSION_TOLERANCE: f64 = 1e-12;

const PROPER_TIME_NODES: NonZeroUsize = NonZeroUsize::new(16).unwrap();

#[derive(Debug, Clone, PartialEq)]
pub enum WorldlineKind {
    Rest,
    UniformVelocity { beta: f64 },
    /// Lab-frame law `z̃ = g t² / 2`.
    UniformAcceleration { g: f64 },
    Tabulated(CubicSpline),
}

/// Serializable summary used in report metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldlineDescriptor {
    pub kind: String,
    pub parameter: Option<f64>,
    pub distance: f64,
    /// Start and end of validity; no end means unbounded.
    pub validity: (f64, Option<f64>),
}

/// Event in the screen's proper frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProperFramePoint {
    pub tau: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ProperFramePoint {
    pub fn new(tau: f64, x: f64, y: f64, z: f64) -> Self {
        Self { tau, x, y, z }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenWorldline {
    kind: WorldlineKind,
    distance: f64,
    start: f64,
    end: f64,
    // proper time at each knot, tabulated kind only
    tau_knots: Vec<f64>,
}

impl ScreenWorldline {
    pub fn new(kind: WorldlineKind, distance: f64, start: f64, end: f64) -> Result<Self> {
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::arg("L", format!("{distance} must be positive")));
        }
        if start.is_nan() || end.is_nan() || !(end > start) || !start.is_finite() {
            return Err(Error::arg(
                "validity",
                format!("[{start}, {end}] is not a valid interval"),
            ));
        }
        let max_beta = match &kind {
            WorldlineKind::Rest => 0.0,
            WorldlineKind::UniformVelocity { beta } => beta.abs(),
            WorldlineKind::UniformAcceleration { g } => {
                if !g.is_finite() {
                    return Err(Error::arg("g", "must be finite"));
                }
                if !end.is_finite() && *g != 0.0 {
                    return Err(Error::arg("validity", "accelerating worldline needs a finite end"));
                }
                g.abs() * start.abs().max(end.abs())
            }
            WorldlineKind::Tabulated(s) => {
                if start < s.start() || end > s.end() {
                    return Err(Error::arg(
                        "validity",
                        format!("[{start}, {end}] exceeds the samples [{}, {}]", s.start(), s.end()),
                    ));
                }
                s.max_abs_slope()
            }
        };
        if !(max_beta < 1.0) {
            let t = if let WorldlineKind::UniformAcceleration { g } = kind {
                if g.abs() * start.abs() > g.abs() * end.abs() { start } else { end }
            } else {
                start
            };
            return Err(Error::Superluminal { t, beta: max_beta });
        }
        let mut w = Self {
            kind,
            distance,
            start,
            end,
            tau_knots: Vec::new(),
        };
        if let WorldlineKind::Tabulated(s) = &w.kind {
            let knots = s.knots().to_vec();
            let mut acc = knots[0];
            let mut taus = vec![acc];
            for pair in knots.windows(2) {
                acc += w.proper_time_segment(pair[0], pair[1]);
                taus.push(acc);
            }
            w.tau_knots = taus;
        }
        Ok(w)
    }

    pub fn rest(distance: f64) -> Result<Self> {
        Self::new(WorldlineKind::Rest, distance, 0.0, f64::INFINITY)
    }

    pub fn uniform_velocity(beta: f64, distance: f64) -> Result<Self> {
        Self::new(WorldlineKind::UniformVelocity { beta }, distance, 0.0, f64::INFINITY)
    }

    /// Valid on `[0, end]`; `end` must keep `|g| end < 1`.
    pub fn uniform_acceleration(g: f64, distance: f64, end: f64) -> Result<Self> {
        Self::new(WorldlineKind::UniformAcceleration { g }, distance, 0.0, end)
    }

    /// Cubic interpolation through `(t_i, z_i)`; valid over the sample range.
    pub fn tabulated(t: Vec<f64>, z: Vec<f64>, distance: f64) -> Result<Self> {
        let s = CubicSpline::new(t, z)?;
        let (a, b) = (s.start(), s.end());
        Self::new(WorldlineKind::Tabulated(s), distance, a, b)
    }

    pub fn kind(&self) -> &WorldlineKind {
        &self.kind
    }

    /// Screen plane position `L`.
    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn validity(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn with_distance(&self, distance: f64) -> Result<Self> {
        Self::new(self.kind.clone(), distance, self.start, self.end)
    }

    pub fn is_rest(&self) -> bool {
        match &self.kind {
            WorldlineKind::Rest => true,
            WorldlineKind::UniformVelocity { beta } => *beta == 0.0,
            WorldlineKind::UniformAcceleration { g } => *g == 0.0,
            WorldlineKind::Tabulated(_) => false,
        }
    }

    pub fn descriptor(&self) -> WorldlineDescriptor {
        let (kind, parameter) = match &self.kind {
            WorldlineKind::Rest => ("rest", None),
            WorldlineKind::UniformVelocity { beta } => ("uniform-velocity", Some(*beta)),
            WorldlineKind::UniformAcceleration { g } => ("uniform-acceleration", Some(*g)),
            WorldlineKind::Tabulated(_) => ("tabulated", None),
        };
        WorldlineDescriptor {
            kind: kind.to_string(),
            parameter,
            distance: self.distance,
            validity: (self.start, self.end.is_finite().then_some(self.end)),
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::OutsideValidity {
                t,
                start: self.start,
                end: self.end,
            })
        }
    }

    /// Position, velocity and acceleration of the central pixel.
    fn kinematics(&self, t: f64) -> (f64, f64, f64) {
        match &self.kind {
            WorldlineKind::Rest => (0.0, 0.0, 0.0),
            WorldlineKind::UniformVelocity { beta } => (beta * t, *beta, 0.0),
            WorldlineKind::UniformAcceleration { g } => (0.5 * g * t * t, g * t, *g),
            WorldlineKind::Tabulated(s) => s.eval(t),
        }
    }

    /// `z̃(t)`.
    pub fn z_of_t(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.kinematics(t).0)
    }

    /// `dz̃/dt`.
    pub fn velocity(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.kinematics(t).1)
    }

    /// `d²z̃/dt²`.
    pub fn acceleration(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.kinematics(t).2)
    }

    pub fn beta_gamma(&self, t: f64) -> Result<(f64, f64)> {
        self.check_time(t)?;
        let beta = self.kinematics(t).1;
        if !(beta.abs() < 1.0) {
            return Err(Error::Superluminal { t, beta });
        }
        Ok((beta, 1.0 / (1.0 - beta * beta).sqrt()))
    }

    /// Proper acceleration `γ³ dβ/dt`, which equals `γ² dβ/dτ`.
    pub fn proper_acceleration(&self, t: f64) -> Result<f64> {
        let (_, gamma) = self.beta_gamma(t)?;
        Ok(gamma.powi(3) * self.kinematics(t).2)
    }

    fn inv_gamma(&self, t: f64) -> f64 {
        let b = self.kinematics(t).1;
        (1.0 - b * b).sqrt()
    }

    fn proper_time_segment(&self, a: f64, b: f64) -> f64 {
        let gl = GaussLegendre::new(PROPER_TIME_NODES);
        gl.integrate(a, b, |t| self.inv_gamma(t))
    }

    /// Proper time of the central pixel, `τ(t) = t_start + ∫ dt / γ` from the
    /// start of the validity interval.
    pub fn proper_time(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let t0 = self.start;
        Ok(match &self.kind {
            WorldlineKind::Rest => t,
            WorldlineKind::UniformVelocity { beta } => t0 + (t - t0) * (1.0 - beta * beta).sqrt(),
            WorldlineKind::UniformAcceleration { g } => {
                t0 + accelerated_proper_time(*g, t) - accelerated_proper_time(*g, t0)
            }
            WorldlineKind::Tabulated(s) => {
                let knots = s.knots();
                let i = match knots.partition_point(|&v| v <= t) {
                    0 => 0,
                    p => (p - 1).min(knots.len() - 2),
                };
                self.tau_knots[i] + self.proper_time_segment(knots[i], t)
            }
        })
    }

    /// Inverse of [`proper_time`](Self::proper_time), to 1e-12 in `t`.
    pub fn coordinate_time(&self, tau: f64) -> Result<f64> {
        let t0 = self.start;
        match &self.kind {
            WorldlineKind::Rest => {
                self.check_time(tau)?;
                return Ok(tau);
            }
            WorldlineKind::UniformVelocity { beta } => {
                let t = t0 + (tau - t0) / (1.0 - beta * beta).sqrt();
                self.check_time(t)?;
                return Ok(t);
            }
            _ => {}
        }
        let (lo_tau, hi_tau) = (self.proper_time(self.start)?, self.proper_time(self.end)?);
        if tau < lo_tau || tau > hi_tau {
            return Err(Error::OutsideValidity {
                t: tau,
                start: lo_tau,
                end: hi_tau,
            });
        }
        // τ(t) is increasing with slope 1/γ in (0, 1]: safeguarded Newton
        let (mut lo, mut hi) = (self.start, self.end);
        let mut t = (t0 + (tau - lo_tau)).clamp(lo, hi);
        for _ in 0..200 {
            let f = self.proper_time(t)? - tau;
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = t - f / self.inv_gamma(t);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= TIME_INVERSION_TOLERANCE * t.abs().max(1.0) {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::NotConverged(format!("coordinate time for tau = {tau}")))
    }

    /// Maps a proper-frame event to Minkowski `(t, x, y, z)`.
    pub fn proper_to_minkowski(&self, p: ProperFramePoint) -> Result<[f64; 4]> {
        let t = self.coordinate_time(p.tau)?;
        let g = self.proper_acceleration(t)?;
        let gz = g * p.z;
        if !(gz.abs() < 1.0) {
            return Err(Error::OutsidePatch { gz: gz.abs() });
        }
        let (beta, gamma) = self.beta_gamma(t)?;
        let z = self.kinematics(t).0;
        Ok([t + beta * gamma * p.z, p.x, p.y + self.distance, z + gamma * p.z])
    }

    /// Largest `β²` over `[a, b]`, sampled densely for the tabulated kind.
    pub fn max_beta_sq(&self, a: f64, b: f64) -> Result<f64> {
        self.check_time(a)?;
        self.check_time(b)?;
        let sample = |t: f64| self.kinematics(t).1.powi(2);
        Ok(match &self.kind {
            WorldlineKind::Rest => 0.0,
            WorldlineKind::UniformVelocity { beta } => beta * beta,
            WorldlineKind::UniformAcceleration { .. } => sample(a).max(sample(b)),
            WorldlineKind::Tabulated(_) => (0..=256)
                .map(|i| sample(a + (b - a) * i as f64 / 256.0))
                .fold(0.0, f64::max),
        })
    }
}

fn accelerated_proper_time(g: f64, t: f64) -> f64 {
    if g == 0.0 {
        return t;
    }
    let x = g * t;
    0.5 * (t * (1.0 - x * x).sqrt() + x.asin() / g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fd(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
        (f(t + h) - f(t - h)) / (2.0 * h)
    }

    #[test]
    fn position_examples() {
        let r = ScreenWorldline::rest(10.0).unwrap();
        assert_eq!(r.z_of_t(123.0).unwrap(), 0.0);
        let a = ScreenWorldline::uniform_acceleration(1e-3, 10.0, 500.0).unwrap();
        assert_abs_diff_eq!(a.z_of_t(100.0).unwrap(), 5.0, epsilon = 1e-12);
        let v = ScreenWorldline::uniform_velocity(0.01, 10.0).unwrap();
        assert_abs_diff_eq!(v.z_of_t(200.0).unwrap(), 2.0, epsilon = 1e-12);
        assert!(matches!(a.z_of_t(600.0), Err(Error::OutsideValidity { .. })));
        assert!(a.z_of_t(-1.0).is_err());
    }

    #[test]
    fn beta_gamma_examples() {
        let r = ScreenWorldline::rest(1.0).unwrap();
        assert_eq!(r.beta_gamma(5.0).unwrap(), (0.0, 1.0));
        let v = ScreenWorldline::uniform_velocity(0.6, 1.0).unwrap();
        let (b, g) = v.beta_gamma(3.0).unwrap();
        assert_abs_diff_eq!(b, 0.6);
        assert_abs_diff_eq!(g, 1.25, epsilon = 1e-15);
        let a = ScreenWorldline::uniform_acceleration(1e-3, 1.0, 100.0).unwrap();
        let (b, g) = a.beta_gamma(10.0).unwrap();
        let b_fd = fd(|t| a.z_of_t(t).unwrap(), 10.0, 1e-3);
        assert!((b / b_fd - 1.0).abs() < 1e-9);
        assert_abs_diff_eq!(b, 1e-2, epsilon = 1e-15);
        assert_abs_diff_eq!(g, 1.0 / (1.0 - b_fd * b_fd).sqrt(), epsilon = 1e-12);
        assert!((g - 1.00005).abs() < 1e-8);
    }

    #[test]
    fn superluminal_rejected() {
        assert!(matches!(
            ScreenWorldline::uniform_velocity(1.0, 1.0),
            Err(Error::Superluminal { .. })
        ));
        assert!(matches!(
            ScreenWorldline::uniform_acceleration(1e-2, 1.0, 200.0),
            Err(Error::Superluminal { .. })
        ));
        let t = vec![0.0, 1.0, 2.0, 3.0];
        let z = vec![0.0, 0.5, 2.0, 4.5];
        assert!(matches!(
            ScreenWorldline::tabulated(t, z, 1.0),
            Err(Error::Superluminal { .. })
        ));
    }

    #[test]
    fn proper_acceleration_examples() {
        let r = ScreenWorldline::rest(1.0).unwrap();
        assert_eq!(r.proper_acceleration(1.0).unwrap(), 0.0);
        let v = ScreenWorldline::uniform_velocity(0.3, 1.0).unwrap();
        assert_eq!(v.proper_acceleration(1.0).unwrap(), 0.0);
        let a = ScreenWorldline::uniform_acceleration(1e-3, 1.0, 100.0).unwrap();
        assert_abs_diff_eq!(a.proper_acceleration(0.5).unwrap(), 1e-3, epsilon = 1e-6);
    }

    // hyperbolic motion sampled on a table: proper acceleration is exactly a
    fn hyperbola(a: f64, n: usize, t_end: f64) -> ScreenWorldline {
        let t: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
        let z = t.iter().map(|t| ((1.0 + (a * t).powi(2)).sqrt() - 1.0) / a).collect();
        ScreenWorldline::tabulated(t, z, 1.0).unwrap()
    }

    #[test]
    fn tabulated_hyperbola_has_constant_proper_acceleration() {
        let w = hyperbola(0.5, 401, 4.0);
        for t in [0.7, 1.9, 3.1] {
            assert!((w.proper_acceleration(t).unwrap() / 0.5 - 1.0).abs() < 1e-5);
        }
        // proper time of hyperbolic motion is asinh(a t) / a
        for t in [1.0, 2.5, 4.0] {
            let tau = w.proper_time(t).unwrap();
            assert!((tau - (0.5 * t as f64).asinh() / 0.5).abs() < 1e-7);
        }
    }

    #[test]
    fn derivatives_consistent_with_position() {
        let sampled = {
            let t: Vec<f64> = (0..60).map(|i| i as f64 * 0.1).collect();
            let z = t.iter().map(|t| 0.05 * (t * 0.7).sin() + 0.01 * t * t).collect();
            ScreenWorldline::tabulated(t, z, 1.0).unwrap()
        };
        let accel = ScreenWorldline::uniform_acceleration(2e-3, 1.0, 300.0).unwrap();
        for w in [&sampled, &accel] {
            for t in [1.234, 2.55, 4.1] {
                let h = 1e-4;
                let b_fd = fd(|s| w.z_of_t(s).unwrap(), t, h);
                let (b, g) = w.beta_gamma(t).unwrap();
                assert!((b - b_fd).abs() <= 1e-6 * b.abs().max(1e-12));
                let bdot = fd(|s| w.velocity(s).unwrap(), t, h);
                let pa = w.proper_acceleration(t).unwrap();
                assert!((pa - g.powi(3) * bdot).abs() <= 1e-6 * pa.abs());
            }
        }
    }

    #[test]
    fn central_pixel_metric_is_proper_time() {
        let worldlines = [
            ScreenWorldline::uniform_acceleration(1e-2, 5.0, 80.0).unwrap(),
            ScreenWorldline::uniform_velocity(0.4, 5.0).unwrap(),
            hyperbola(0.2, 200, 10.0),
        ];
        for w in &worldlines {
            let h = 1e-2;
            for i in 1..50 {
                let t = 0.1 * i as f64;
                let dt = h;
                let dz = w.z_of_t(t + h).unwrap() - w.z_of_t(t).unwrap();
                let dtau = w.proper_time(t + h).unwrap() - w.proper_time(t).unwrap();
                let ds2 = -dt * dt + dz * dz;
                assert!((ds2 + dtau * dtau).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn coordinate_time_inverts_proper_time() {
        let w = ScreenWorldline::uniform_acceleration(5e-3, 1.0, 150.0).unwrap();
        for t in [0.0, 12.3, 99.0, 150.0] {
            let tau = w.proper_time(t).unwrap();
            assert!((w.coordinate_time(tau).unwrap() - t).abs() < 1e-10);
        }
        let h = hyperbola(0.3, 100, 5.0);
        let tau = h.proper_time(3.3).unwrap();
        assert!((h.coordinate_time(tau).unwrap() - 3.3).abs() < 1e-10);
    }

    #[test]
    fn proper_to_minkowski_rest_and_axis() {
        let r = ScreenWorldline::rest(7.0).unwrap();
        let e = r.proper_to_minkowski(ProperFramePoint::new(3.0, 0.5, 0.2, -1.0)).unwrap();
        assert_eq!(e, [3.0, 0.5, 7.2, -1.0]);
        let a = ScreenWorldline::uniform_acceleration(1e-3, 2.0, 400.0).unwrap();
        let tau = a.proper_time(200.0).unwrap();
        let e = a.proper_to_minkowski(ProperFramePoint::new(tau, 0.0, 0.0, 0.0)).unwrap();
        assert!((e[0] - 200.0).abs() < 1e-9);
        assert!((e[3] - a.z_of_t(200.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn uniform_velocity_matches_boost() {
        let beta: f64 = 0.6;
        let gamma = 1.0 / (1.0 - beta * beta).sqrt();
        let w = ScreenWorldline::uniform_velocity(beta, 1.0).unwrap();
        let (tau, z) = (4.0, 1.5);
        let e = w.proper_to_minkowski(ProperFramePoint::new(tau, 0.0, 0.0, z)).unwrap();
        // standard boost of the rest-frame event (τ, Z)
        assert_abs_diff_eq!(e[0], gamma * (tau + beta * z), epsilon = 1e-12);
        assert_abs_diff_eq!(e[3], gamma * (beta * tau + z), epsilon = 1e-12);
    }

    #[test]
    fn simultaneity_surface_has_slope_beta() {
        let w = ScreenWorldline::uniform_acceleration(1e-3, 1.0, 500.0).unwrap();
        let tau = w.proper_time(300.0).unwrap();
        let (beta, _) = w.beta_gamma(300.0).unwrap();
        let p: Vec<[f64; 4]> = [-2.0, 0.0, 3.0]
            .iter()
            .map(|&z| w.proper_to_minkowski(ProperFramePoint::new(tau, 0.0, 0.0, z)).unwrap())
            .collect();
        let s1 = (p[1][0] - p[0][0]) / (p[1][3] - p[0][3]);
        let s2 = (p[2][0] - p[1][0]) / (p[2][3] - p[1][3]);
        assert_abs_diff_eq!(s1, beta, epsilon = 1e-12);
        assert_abs_diff_eq!(s2, beta, epsilon = 1e-12);
    }

    #[test]
    fn patch_limit() {
        let w = ScreenWorldline::uniform_acceleration(0.1, 1.0, 5.0).unwrap();
        assert!(w.proper_to_minkowski(ProperFramePoint::new(0.0, 0.0, 0.0, 5.0)).is_ok());
        assert!(matches!(
            w.proper_to_minkowski(ProperFramePoint::new(0.0, 0.0, 0.0, 10.0)),
            Err(Error::OutsidePatch { .. })
        ));
    }
}
