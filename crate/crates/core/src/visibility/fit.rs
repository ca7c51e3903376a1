use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Minimum number of fringe periods the sampled range must span.
pub const MIN_PERIODS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Degree of the slowly varying polynomial multiplying each basis term.
    pub degree: usize,
    /// Half-width of the fit window in units of the intensity standard deviation.
    pub window_sigmas: f64,
    /// Lower bound on the half-width in fringe periods.
    pub min_half_periods: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            degree: 6,
            window_sigmas: 0.5,
            min_half_periods: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFit {
    pub visibility: f64,
    pub phase: f64,
    pub baseline: f64,
    pub centre: f64,
    pub half_width: f64,
    pub residual: f64,
}

/// Least-squares fit of `σ(Z) ≈ C(Z) [1 + V(Z) cos(αZ + φ(Z))]` around the
/// intensity centroid, with slowly varying coefficients. Returns the values
/// at the centre.
pub fn fit_fringes(z: &[f64], sigma: &[f64], alpha: f64, opts: FitOptions) -> Result<FringeFit> {
    if z.len() != sigma.len() || z.len() < 2 {
        return Err(Error::arg("pattern", "coordinate and value lengths differ"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::arg("alpha", format!("{alpha} must be positive")));
    }
    let span = z[z.len() - 1] - z[0];
    let periods = span * alpha / TAU;
    if periods < MIN_PERIODS {
        return Err(Error::InsufficientFringes { periods });
    }
    let total: f64 = sigma.iter().sum();
    let (centre, spread) = if total > 0.0 {
        let c = z.iter().zip(sigma).map(|(z, s)| z * s).sum::<f64>() / total;
        let v = z.iter().zip(sigma).map(|(z, s)| s * (z - c).powi(2)).sum::<f64>() / total;
        (c, v.sqrt())
    } else {
        (0.5 * (z[0] + z[z.len() - 1]), span / 12f64.sqrt())
    };
    let period = TAU / alpha;
    let half = (opts.window_sigmas * spread)
        .max(opts.min_half_periods * period)
        .min(0.5 * span);
    let idx: Vec<usize> = (0..z.len()).filter(|&i| (z[i] - centre).abs() <= half).collect();
    let cols = 3 * (opts.degree + 1);
    if idx.len() < 2 * cols {
        return Err(Error::InsufficientFringes {
            periods: 2.0 * half / period,
        });
    }
    let mut a = DMatrix::<f64>::zeros(idx.len(), cols);
    let mut b = DVector::<f64>::zeros(idx.len());
    for (r, &i) in idx.iter().enumerate() {
        let u = (z[i] - centre) / half;
        let (s, c) = (alpha * z[i]).sin_cos();
        for (k, p) in legendre(opts.degree, u).into_iter().enumerate() {
            a[(r, 3 * k)] = p;
            a[(r, 3 * k + 1)] = p * c;
            a[(r, 3 * k + 2)] = p * s;
        }
        b[r] = sigma[i];
    }
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::NotConverged(format!("fringe fit: {e}")))?;
    let residual = (&a * &coef - &b).norm() / (idx.len() as f64).sqrt();
    // coefficients at the window centre, u = 0
    let at_centre = legendre(opts.degree, 0.0);
    let value = |j: usize| (0..=opts.degree).map(|k| coef[3 * k + j] * at_centre[k]).sum::<f64>();
    let baseline = value(0);
    let (ac, bs) = (value(1), value(2));
    // a cos αZ + b sin αZ = R cos(αZ + φ) with R cos φ = a, R sin φ = -b
    let amp = ac.hypot(bs);
    let visibility = if baseline > 0.0 { amp / baseline } else { 0.0 };
    let phase = (-bs).atan2(ac);
    Ok(FringeFit {
        visibility,
        phase,
        baseline,
        centre,
        half_width: half,
        residual,
    })
}

/// `P_0(u) ..= P_degree(u)`.
fn legendre(degree: usize, u: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(degree + 1);
    p.push(1.0);
    if degree > 0 {
        p.push(u);
    }
    for k in 1..degree {
        let kf = k as f64;
        p.push(((2.0 * kf + 1.0) * u * p[k] - kf * p[k - 1]) / (kf + 1.0));
    }
    p
}

/// Fringe wavenumber of a sampled pattern: peak of the zero-padded
/// periodogram, refined by a parabola through the logarithm of the three
/// highest bins (exact for a Gaussian envelope).
pub fn estimate_wavenumber(z: &[f64], sigma: &[f64]) -> Result<f64> {
    let n = z.len();
    if n < 16 || sigma.len() != n {
        return Err(Error::arg("pattern", "too few samples"));
    }
    let dz = (z[n - 1] - z[0]) / (n - 1) as f64;
    let padded = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex64> = sigma
        .iter()
        .map(|s| Complex64::new(*s, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(padded)
        .collect();
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let dk = TAU / (padded as f64 * dz);
    // skip the envelope: anything with fewer than MIN_PERIODS over the range
    let k_min = TAU * MIN_PERIODS / (n as f64 * dz);
    let start = ((k_min / dk).ceil() as usize).max(1);
    let power = |i: usize| buf[i].norm_sqr();
    let best = (start..padded / 2 - 1)
        .max_by(|&a, &b| power(a).total_cmp(&power(b)))
        .ok_or(Error::InsufficientFringes { periods: 0.0 })?;
    if best == start || power(best) == 0.0 {
        return Err(Error::InsufficientFringes {
            periods: best as f64 * dk * n as f64 * dz / TAU,
        });
    }
    let (a, b, c) = (power(best - 1).ln(), power(best).ln(), power(best + 1).ln());
    let offset = 0.5 * (a - c) / (a - 2.0 * b + c);
    Ok((best as f64 + offset) * dk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn exact_model_input() {
        let z = grid(2001, -20.0, 20.0);
        let s: Vec<f64> = z.iter().map(|z| 1.0 + 0.8 * (2.0 * z).cos()).collect();
        let f = fit_fringes(&z, &s, 2.0, FitOptions::default()).unwrap();
        assert_abs_diff_eq!(f.visibility, 0.8, epsilon = 1e-6);
        assert_abs_diff_eq!(f.phase, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn phase_convention() {
        let z = grid(2001, -20.0, 20.0);
        let s: Vec<f64> = z.iter().map(|z| 3.0 * (1.0 + 0.4 * (2.0 * z + 0.7).cos())).collect();
        let f = fit_fringes(&z, &s, 2.0, FitOptions::default()).unwrap();
        assert_abs_diff_eq!(f.visibility, 0.4, epsilon = 1e-9);
        assert_abs_diff_eq!(f.phase, 0.7, epsilon = 1e-9);
        assert_abs_diff_eq!(f.baseline, 3.0, epsilon = 1e-9);
    }

    #[test]
    fn flat_pattern_has_zero_visibility() {
        let z = grid(1001, -10.0, 10.0);
        let s = vec![2.0; z.len()];
        let f = fit_fringes(&z, &s, 2.0, FitOptions::default()).unwrap();
        assert!(f.visibility < 1e-8, "{}", f.visibility);
    }

    #[test]
    fn envelope_modulated_fringes() {
        let z = grid(8001, -60.0, 60.0);
        let s: Vec<f64> = z
            .iter()
            .map(|z| (-(z - 1.0) * (z - 1.0) / 200.0).exp() * (1.0 + 0.6 * (3.0 * z).cos()))
            .collect();
        let f = fit_fringes(&z, &s, 3.0, FitOptions::default()).unwrap();
        assert_abs_diff_eq!(f.visibility, 0.6, epsilon = 1e-6);
    }

    #[test]
    fn too_few_periods() {
        let z = grid(101, 0.0, 5.0);
        let s: Vec<f64> = z.iter().map(|z| 1.0 + (2.0 * z).cos()).collect();
        assert!(matches!(
            fit_fringes(&z, &s, 2.0, FitOptions::default()),
            Err(Error::InsufficientFringes { .. })
        ));
    }

    #[test]
    fn wavenumber_estimate() {
        let z = grid(8192, -80.0, 80.0);
        let s: Vec<f64> = z
            .iter()
            .map(|z| (-(z * z) / 400.0).exp() * (1.0 + (2.345 * z).cos()))
            .collect();
        let a = estimate_wavenumber(&z, &s).unwrap();
        assert!((a / 2.345 - 1.0).abs() < 1e-6, "{a}");
    }
}
