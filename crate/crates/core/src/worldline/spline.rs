use crate::error::{Error, Result};

/// Not-a-knot cubic interpolant. Reproduces cubics exactly and is C² at the
/// knots, so its second derivative exists everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    t: Vec<f64>,
    z: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(t: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        let n = t.len();
        if n != z.len() {
            return Err(Error::arg("samples", "time and position columns differ in length"));
        }
        if n < 4 {
            return Err(Error::arg("samples", format!("{n} samples (need at least 4)")));
        }
        if t.iter().chain(&z).any(|v| !v.is_finite()) {
            return Err(Error::arg("samples", "non-finite sample"));
        }
        if let Some(i) = t.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::arg(
                "samples",
                format!("times not strictly increasing at index {}", i + 1),
            ));
        }
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (z[i + 1] - z[i]) / h[i]).collect();

        // unknowns M_1..M_{n-2}; M_0 and M_{n-1} are eliminated with the
        // third-derivative continuity at t_1 and t_{n-2}
        let k = n - 2;
        let mut sub = vec![0.0; k];
        let mut diag = vec![0.0; k];
        let mut sup = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for r in 0..k {
            let i = r + 1;
            sub[r] = h[i - 1];
            diag[r] = 2.0 * (h[i - 1] + h[i]);
            sup[r] = h[i];
            rhs[r] = 6.0 * (slope[i] - slope[i - 1]);
        }
        let (h0, h1) = (h[0], h[1]);
        diag[0] += h0 * (1.0 + h0 / h1);
        sup[0] -= h0 * h0 / h1;
        let (ha, hb) = (h[n - 3], h[n - 2]);
        diag[k - 1] += hb * (1.0 + hb / ha);
        sub[k - 1] -= hb * hb / ha;

        let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        let mut m = Vec::with_capacity(n);
        m.push(inner[0] * (1.0 + h0 / h1) - inner[1] * h0 / h1);
        m.extend_from_slice(&inner);
        m.push(inner[k - 1] * (1.0 + hb / ha) - inner[k - 2] * hb / ha);
        Ok(Self { t, z, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn start(&self) -> f64 {
        self.t[0]
    }

    pub fn end(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.t.len();
        match self.t.partition_point(|&v| v <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        }
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let i = self.interval(x);
        let h = self.t[i + 1] - self.t[i];
        let a = self.t[i + 1] - x;
        let b = x - self.t[i];
        let (mi, mj) = (self.m[i], self.m[i + 1]);
        let ci = self.z[i] / h - mi * h / 6.0;
        let cj = self.z[i + 1] / h - mj * h / 6.0;
        let v = mi * a.powi(3) / (6.0 * h) + mj * b.powi(3) / (6.0 * h) + ci * a + cj * b;
        let d1 = -mi * a * a / (2.0 * h) + mj * b * b / (2.0 * h) - ci + cj;
        let d2 = (mi * a + mj * b) / h;
        (v, d1, d2)
    }

    /// Largest `|dz/dt|` over the knot range. The derivative is quadratic on
    /// each interval, so the maximum sits at an end point or the vertex.
    pub fn max_abs_slope(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.t.len() - 1 {
            let (t0, t1) = (self.t[i], self.t[i + 1]);
            best = best.max(self.eval(t0).1.abs()).max(self.eval(t1).1.abs());
            let (mi, mj) = (self.m[i], self.m[i + 1]);
            if mi != mj {
                // d2 vanishes where mi a + mj b = 0
                let h = t1 - t0;
                let b = -mi * h / (mj - mi);
                if b > 0.0 && b < h {
                    best = best.max(self.eval(t0 + b).1.abs());
                }
            }
        }
        best
    }
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::arg("samples", "singular spline system"));
    }
    c[0] = sup[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        if denom.abs() < 1e-300 {
            return Err(Error::arg("samples", "singular spline system"));
        }
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}
