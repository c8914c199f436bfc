//! Interpolation on uniform 1-D grids.

/// Uniformly spaced samples `values[i] = f(start + i * step)`.
#[derive(Debug, Clone)]
pub struct UniformTable {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl UniformTable {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Self {
        debug_assert!(step > 0.0 && values.len() >= 2);
        Self {
            start,
            step,
            values,
        }
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.start && x <= self.end()
    }

    pub fn node(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    /// Piecewise-linear interpolation; `outside` is returned beyond the range.
    #[inline]
    pub fn linear(&self, x: f64, outside: f64) -> f64 {
        let s = (x - self.start) / self.step;
        if !(s >= 0.0) {
            return outside;
        }
        let i = s as usize;
        let last = self.values.len() - 1;
        if i >= last {
            return if i == last && s == last as f64 {
                self.values[last]
            } else {
                outside
            };
        }
        let frac = s - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Four-point cubic Lagrange interpolation, falling back to lower order
    /// at the edges.
    pub fn cubic(&self, x: f64, outside: f64) -> f64 {
        let n = self.values.len();
        let s = (x - self.start) / self.step;
        if !(s >= 0.0) || s > (n - 1) as f64 {
            return outside;
        }
        if n < 4 {
            return self.linear(x, outside);
        }
        let i = (s.floor() as usize).min(n - 2);
        let base = i.saturating_sub(1).min(n - 4);
        let t = s - base as f64;
        let v = &self.values[base..base + 4];
        lagrange4(v, t)
    }
}

/// Cubic through `(0,v0),(1,v1),(2,v2),(3,v3)` evaluated at `t`.
#[inline]
pub fn lagrange4(v: &[f64], t: f64) -> f64 {
    let (a, b, c, d) = (t, t - 1.0, t - 2.0, t - 3.0);
    -v[0] * b * c * d / 6.0 + v[1] * a * c * d / 2.0 - v[2] * a * b * d / 2.0
        + v[3] * a * b * c / 6.0
}

/// Cubic Hermite interpolation from values and first derivatives.
#[inline]
pub fn hermite(x0: f64, h: f64, f0: f64, f1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * f0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * f1
        + (t3 - t2) * h * d1
}
