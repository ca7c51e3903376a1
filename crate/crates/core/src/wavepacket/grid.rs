use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Power fraction allowed in the outer eighth of the momentum band before a
/// state is declared aliased.
pub const ALIASING_TOLERANCE: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> std::sync::Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisLabel {
    X,
    Y,
    Z,
}

/// One uniformly sampled axis. Sample `j` sits at `origin + j * spacing`.
///
/// `carrier` is a plane-wave wavenumber factored out of the stored samples:
/// the wavefunction is `e^{i carrier r} χ(r)` with only the envelope `χ`
/// kept on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub label: AxisLabel,
    pub points: usize,
    pub spacing: f64,
    pub origin: f64,
    pub carrier: f64,
}

impl GridAxis {
    /// Axis centred on zero.
    pub fn centered(label: AxisLabel, points: usize, spacing: f64) -> Result<Self> {
        Self::with_origin(label, points, spacing, -(points as f64) * spacing / 2.0)
    }

    pub fn with_origin(label: AxisLabel, points: usize, spacing: f64, origin: f64) -> Result<Self> {
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::arg("points", format!("{points} is not a power of two >= 2")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::arg("spacing", format!("{spacing} must be positive and finite")));
        }
        if !origin.is_finite() {
            return Err(Error::arg("origin", "must be finite"));
        }
        Ok(Self {
            label,
            points,
            spacing,
            origin,
            carrier: 0.0,
        })
    }

    pub fn position(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.spacing
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.position(j)).collect()
    }

    pub fn extent(&self) -> f64 {
        self.points as f64 * self.spacing
    }

    pub fn wavenumber_spacing(&self) -> f64 {
        TAU / self.extent()
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.spacing
    }

    /// Envelope wavenumber of FFT bin `k` (standard FFT ordering).
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.points;
        let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        signed * self.wavenumber_spacing()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.wavenumber(k)).collect()
    }

    fn same_sampling(&self, other: &GridAxis) -> bool {
        self.label == other.label
            && self.points == other.points
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Position,
    Momentum,
}

/// Complex amplitude samples of a non-relativistic wavefunction on a uniform
/// grid of one to three axes, row-major.
///
/// In the momentum representation sample `k` holds the continuous Fourier
/// amplitude `(2π)^{-d/2} ∫ χ(r) e^{-iq·r} dr` of the envelope at the
/// FFT-ordered wavenumbers `q` of each axis, so `Σ|χ̂|² Π dq = Σ|χ|² Π dr`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid {
    axes: Vec<GridAxis>,
    data: Vec<Complex64>,
    repr: Representation,
}

impl WavefunctionGrid {
    pub fn from_samples(
        axes: Vec<GridAxis>,
        data: Vec<Complex64>,
        repr: Representation,
    ) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::arg("axes", format!("{} axes (need 1 to 3)", axes.len())));
        }
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.label == a.label) {
                return Err(Error::arg("axes", format!("duplicate axis {:?}", a.label)));
            }
        }
        let len: usize = axes.iter().map(|a| a.points).product();
        if data.len() != len {
            return Err(Error::arg(
                "data",
                format!("{} samples for a grid of {len} points", data.len()),
            ));
        }
        if data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::arg("data", "non-finite amplitude"));
        }
        Ok(Self { axes, data, repr })
    }

    /// Samples `f` (which returns the full wavefunction, carrier included) at the
    /// grid positions. All axis carriers must be zero for this constructor.
    pub fn from_position_fn<F>(axes: Vec<GridAxis>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let len: usize = axes.iter().map(|a| a.points).product();
        let mut data = Vec::with_capacity(len);
        let mut coords = vec![0.0; axes.len()];
        for flat in 0..len {
            unravel(flat, &axes, |axis, j| coords[axis] = axes[axis].position(j));
            data.push(f(&coords));
        }
        Self::from_samples(axes, data, Representation::Position)
    }

    /// Samples the momentum amplitude `f(k)` at the FFT-ordered wavenumbers.
    pub fn from_momentum_fn<F>(axes: Vec<GridAxis>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let len: usize = axes.iter().map(|a| a.points).product();
        let mut data = Vec::with_capacity(len);
        let mut q = vec![0.0; axes.len()];
        for flat in 0..len {
            unravel(flat, &axes, |axis, k| q[axis] = axes[axis].wavenumber(k));
            data.push(f(&q));
        }
        Self::from_samples(axes, data, Representation::Momentum)
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn axis(&self, label: AxisLabel) -> Option<(usize, &GridAxis)> {
        self.axes.iter().enumerate().find(|(_, a)| a.label == label)
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn repr(&self) -> Representation {
        self.repr
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    fn cell_volume(&self) -> f64 {
        match self.repr {
            Representation::Position => self.axes.iter().map(|a| a.spacing).product(),
            Representation::Momentum => self.axes.iter().map(|a| a.wavenumber_spacing()).product(),
        }
    }

    /// `∫|ψ|² dV` in whichever representation the samples are held.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.cell_volume()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > 0.0) {
            return Err(Error::arg("data", "cannot normalize a zero wavefunction"));
        }
        let s = 1.0 / n.sqrt();
        self.data.iter_mut().for_each(|c| *c *= s);
        Ok(self)
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        self.data.iter_mut().for_each(|c| *c *= factor);
        self
    }

    pub fn to_momentum(&self) -> WavefunctionGrid {
        match self.repr {
            Representation::Momentum => self.clone(),
            Representation::Position => {
                let mut out = self.clone();
                out.transform(FftDirection::Forward);
                out
            }
        }
    }

    pub fn to_position(&self) -> WavefunctionGrid {
        match self.repr {
            Representation::Position => self.clone(),
            Representation::Momentum => {
                let mut out = self.clone();
                out.transform(FftDirection::Inverse);
                out
            }
        }
    }

    fn transform(&mut self, direction: FftDirection) {
        let shape = self.shape();
        if direction == FftDirection::Inverse {
            self.apply_origin_phase(1.0);
        }
        for axis in 0..shape.len() {
            fft_along_axis(&mut self.data, &shape, axis, direction);
        }
        let scale: f64 = match direction {
            FftDirection::Forward => self.axes.iter().map(|a| a.spacing / TAU.sqrt()).product(),
            FftDirection::Inverse => self
                .axes
                .iter()
                .map(|a| a.wavenumber_spacing() / TAU.sqrt())
                .product(),
        };
        self.data.iter_mut().for_each(|c| *c *= scale);
        if direction == FftDirection::Forward {
            self.apply_origin_phase(-1.0);
        }
        self.repr = match direction {
            FftDirection::Forward => Representation::Momentum,
            FftDirection::Inverse => Representation::Position,
        };
    }

    // multiplies each momentum sample by e^{sign·i q·origin}
    fn apply_origin_phase(&mut self, sign: f64) {
        let origins: Vec<f64> = self.axes.iter().map(|a| a.origin).collect();
        if origins.iter().all(|&o| o == 0.0) {
            return;
        }
        self.map_momentum(|q| {
            let phase: f64 = q.iter().zip(&origins).map(|(q, o)| q * o).sum();
            Complex64::from_polar(1.0, sign * phase)
        });
    }

    /// Multiplies every momentum-space sample by `f(q)`. Requires the momentum
    /// representation.
    pub(crate) fn map_momentum<F>(&mut self, f: F)
    where
        F: Fn(&[f64]) -> Complex64,
    {
        // per-axis tables keep the inner loop cheap for separable phases, but
        // `f` may be arbitrary so it is evaluated per sample
        let axes = self.axes.clone();
        let mut q = vec![0.0; axes.len()];
        for (flat, c) in self.data.iter_mut().enumerate() {
            unravel(flat, &axes, |axis, k| q[axis] = axes[axis].wavenumber(k));
            *c *= f(&q);
        }
    }

    /// Separable variant of [`map_momentum`](Self::map_momentum): the factor is
    /// a product of one table per axis.
    pub(crate) fn map_momentum_separable(&mut self, tables: &[Vec<Complex64>]) {
        let axes = self.axes.clone();
        if axes.len() == 1 {
            self.data
                .iter_mut()
                .zip(&tables[0])
                .for_each(|(c, t)| *c *= t);
            return;
        }
        for (flat, c) in self.data.iter_mut().enumerate() {
            let mut factor = Complex64::new(1.0, 0.0);
            unravel(flat, &axes, |axis, k| factor *= tables[axis][k]);
            *c *= factor;
        }
    }

    pub(crate) fn axes_mut(&mut self) -> &mut [GridAxis] {
        &mut self.axes
    }

    /// Fails with [`Error::Aliasing`] when more than [`ALIASING_TOLERANCE`] of
    /// the momentum power lies in the outer eighth of any axis' band.
    pub fn check_bandwidth(&self) -> Result<()> {
        let k = self.to_momentum();
        let total: f64 = k.data.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return Ok(());
        }
        for (axis_idx, axis) in k.axes.iter().enumerate() {
            let edge = 0.875 * axis.nyquist();
            let mut outer = 0.0;
            for (flat, c) in k.data.iter().enumerate() {
                let mut qa = 0.0;
                unravel(flat, &k.axes, |a, idx| {
                    if a == axis_idx {
                        qa = k.axes[a].wavenumber(idx);
                    }
                });
                if qa.abs() >= edge {
                    outer += c.norm_sqr();
                }
            }
            let fraction = outer / total;
            if fraction > ALIASING_TOLERANCE {
                return Err(Error::Aliasing {
                    axis: axis_idx,
                    fraction,
                });
            }
        }
        Ok(())
    }

    /// `|ψ|²` at the grid positions.
    pub fn density(&self) -> Vec<f64> {
        self.to_position().data.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Full wavefunction values `ψ(r_j + shift)` at every grid point displaced by
    /// `shifts` (one per axis), computed by a spectral translation so no
    /// interpolation is involved. The grid is periodic: shifts should stay well
    /// inside the region where the envelope has decayed.
    pub fn sample_shifted(&self, shifts: &[f64]) -> Result<Vec<Complex64>> {
        if shifts.len() != self.axes.len() {
            return Err(Error::arg("shifts", "one shift per axis required"));
        }
        let mut k = self.to_momentum();
        let tables: Vec<Vec<Complex64>> = k
            .axes
            .iter()
            .zip(shifts)
            .map(|(a, &d)| {
                (0..a.points)
                    .map(|j| Complex64::from_polar(1.0, a.wavenumber(j) * d))
                    .collect()
            })
            .collect();
        k.map_momentum_separable(&tables);
        let pos = k.to_position();
        let axes = &self.axes;
        if axes.iter().all(|a| a.carrier == 0.0) {
            return Ok(pos.data);
        }
        let mut out = pos.data;
        for (flat, c) in out.iter_mut().enumerate() {
            let mut phase = 0.0;
            unravel(flat, axes, |axis, j| {
                let a = &axes[axis];
                phase += a.carrier * (a.position(j) + shifts[axis]);
            });
            *c *= Complex64::from_polar(1.0, phase);
        }
        Ok(out)
    }

    /// Band-limited evaluation of the full wavefunction at an arbitrary point.
    pub fn amplitude_at(&self, r: &[f64]) -> Result<Complex64> {
        if r.len() != self.axes.len() {
            return Err(Error::arg("r", "one coordinate per axis required"));
        }
        let k = self.to_momentum();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut q = vec![0.0; k.axes.len()];
        for (flat, c) in k.data.iter().enumerate() {
            unravel(flat, &k.axes, |axis, idx| q[axis] = k.axes[axis].wavenumber(idx));
            let phase: f64 = q.iter().zip(r).map(|(q, x)| q * x).sum();
            acc += c * Complex64::from_polar(1.0, phase);
        }
        let scale: f64 = k
            .axes
            .iter()
            .map(|a| a.wavenumber_spacing() / TAU.sqrt())
            .product();
        let carrier: f64 = k.axes.iter().zip(r).map(|(a, x)| a.carrier * x).sum();
        Ok(acc * scale * Complex64::from_polar(1.0, carrier))
    }

    /// Mean position along `axis` (position representation density).
    pub fn centroid(&self, axis: usize) -> f64 {
        let (m0, m1, _) = self.moments(axis);
        m1 / m0
    }

    /// Standard deviation of `|ψ|²` along `axis`.
    pub fn width(&self, axis: usize) -> f64 {
        let (m0, m1, m2) = self.moments(axis);
        let mean = m1 / m0;
        (m2 / m0 - mean * mean).max(0.0).sqrt()
    }

    fn moments(&self, axis: usize) -> (f64, f64, f64) {
        let pos = self.to_position();
        let a = &pos.axes[axis];
        // accumulate relative to the axis centre to limit cancellation
        let centre = a.origin + 0.5 * a.extent();
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (flat, c) in pos.data.iter().enumerate() {
            let mut x = 0.0;
            unravel(flat, &pos.axes, |ax, j| {
                if ax == axis {
                    x = pos.axes[ax].position(j) - centre;
                }
            });
            let p = c.norm_sqr();
            m0 += p;
            m1 += p * x;
            m2 += p * x * x;
        }
        let m1c = m1 + centre * m0;
        let mean = m1 / m0;
        let var_m2 = m2 - mean * mean * m0;
        let mean_abs = m1c / m0;
        (m0, m1c, var_m2 + mean_abs * mean_abs * m0)
    }

    /// Checks that two grids share sampling (labels, sizes, spacings).
    pub fn same_sampling(&self, other: &WavefunctionGrid) -> bool {
        self.axes.len() == other.axes.len()
            && self
                .axes
                .iter()
                .zip(&other.axes)
                .all(|(a, b)| a.same_sampling(b))
    }
}

/// Calls `visit(axis, index)` for every axis of the row-major flat index.
fn unravel<F: FnMut(usize, usize)>(mut flat: usize, axes: &[GridAxis], mut visit: F) {
    for axis in (0..axes.len()).rev() {
        let n = axes[axis].points;
        visit(axis, flat % n);
        flat /= n;
    }
}

fn fft_along_axis(data: &mut [Complex64], shape: &[usize], axis: usize, direction: FftDirection) {
    let n = shape[axis];
    let fft = plan(n, direction);
    let stride: usize = shape[axis + 1..].iter().product();
    if stride == 1 {
        fft.process(data);
        return;
    }
    let outer: usize = shape[..axis].iter().product();
    let mut lane = vec![Complex64::new(0.0, 0.0); n];
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * n * stride + inner;
            for (j, v) in lane.iter_mut().enumerate() {
                *v = data[base + j * stride];
            }
            fft.process(&mut lane);
            for (j, v) in lane.iter().enumerate() {
                data[base + j * stride] = *v;
            }
        }
    }
}
