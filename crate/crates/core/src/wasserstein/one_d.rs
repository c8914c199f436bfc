use super::DiscreteMeasure;
use crate::error::{invalid, Error, Result};
use crate::grid::GridDensity;
use crate::quadrature;

/// A one-dimensional measure in either representation.
#[derive(Debug, Clone, Copy)]
pub enum Measure1d<'a> {
    Discrete(&'a DiscreteMeasure),
    Grid(&'a GridDensity),
}

impl<'a> From<&'a DiscreteMeasure> for Measure1d<'a> {
    fn from(m: &'a DiscreteMeasure) -> Self {
        Measure1d::Discrete(m)
    }
}

impl<'a> From<&'a GridDensity> for Measure1d<'a> {
    fn from(g: &'a GridDensity) -> Self {
        Measure1d::Grid(g)
    }
}

/// Quantile function as consecutive affine pieces over `[0, 1]`.
#[derive(Debug, Clone)]
struct Pieces {
    /// Right ends of the `u` intervals; the first starts at 0.
    u_end: Vec<f64>,
    /// `(x at left end, x at right end)` of each piece.
    x: Vec<(f64, f64)>,
}

impl Pieces {
    fn from_measure(m: Measure1d<'_>) -> Result<Self> {
        match m {
            Measure1d::Discrete(d) => {
                if d.dim() != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        got: d.dim(),
                    });
                }
                let mut atoms: Vec<(f64, f64)> = d
                    .support()
                    .iter()
                    .copied()
                    .zip(d.weights().iter().copied())
                    .collect();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                let mut acc = 0.0;
                let mut out = Pieces {
                    u_end: Vec::with_capacity(atoms.len()),
                    x: Vec::with_capacity(atoms.len()),
                };
                for (x, w) in atoms {
                    acc += w;
                    out.u_end.push(acc / total);
                    out.x.push((x, x));
                }
                out.close();
                Ok(out)
            }
            Measure1d::Grid(g) => {
                let cdf = g.cdf_nodes()?;
                let axis = g.axis(0);
                let mut out = Pieces {
                    u_end: Vec::new(),
                    x: Vec::new(),
                };
                for i in 0..cdf.len() - 1 {
                    if cdf[i + 1] > cdf[i] {
                        out.u_end.push(cdf[i + 1]);
                        out.x.push((axis.node(i), axis.node(i + 1)));
                    }
                }
                out.close();
                Ok(out)
            }
        }
    }

    fn close(&mut self) {
        if let Some(last) = self.u_end.last_mut() {
            *last = 1.0;
        }
    }

    fn start(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.u_end[k - 1]
        }
    }

    fn eval(&self, k: usize, u: f64) -> f64 {
        let (a, b) = (self.start(k), self.u_end[k]);
        let (x0, x1) = self.x[k];
        if b <= a || x0 == x1 {
            return x0;
        }
        let t = ((u - a) / (b - a)).clamp(0.0, 1.0);
        x0 + t * (x1 - x0)
    }
}

/// `int_0^L |D(u)|^p du` for `D` affine from `d0` to `d1` over length `len`.
fn affine_power_integral(d0: f64, d1: f64, len: f64, p: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    if d0 * d1 < 0.0 {
        let t = d0 / (d0 - d1);
        return affine_power_integral(d0, 0.0, t * len, p)
            + affine_power_integral(0.0, d1, (1.0 - t) * len, p);
    }
    let (a, b) = (d0.abs(), d1.abs());
    let spread = (b - a).abs();
    if spread <= 1e-6 * (a + b) {
        // nearly constant: three-point Gauss is exact far below rounding
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let r = (0.6f64).sqrt();
        let f = |s: f64| (mid + half * s).powf(p);
        return len * (5.0 * f(-r) + 8.0 * f(0.0) + 5.0 * f(r)) / 18.0;
    }
    len * (b.powf(p + 1.0) - a.powf(p + 1.0)) / ((p + 1.0) * (b - a))
}

/// `(int_0^1 |F^{-1}(u) - G^{-1}(u)|^p du)^{1/p}`, exact on the piecewise
/// representations of both measures.
pub fn wp_quantile_1d<'a, 'b>(
    mu: impl Into<Measure1d<'a>>,
    nu: impl Into<Measure1d<'b>>,
    p: f64,
) -> Result<f64> {
    Ok(wp_quantile_1d_power(mu, nu, p)?.powf(1.0 / p))
}

/// `W_p^p` counterpart of [`wp_quantile_1d`].
pub fn wp_quantile_1d_power<'a, 'b>(
    mu: impl Into<Measure1d<'a>>,
    nu: impl Into<Measure1d<'b>>,
    p: f64,
) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!(
            "order p = {p} must be a finite value >= 1"
        )));
    }
    let a = Pieces::from_measure(mu.into())?;
    let b = Pieces::from_measure(nu.into())?;
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0;
    let mut total = 0.0;
    while i < a.u_end.len() && j < b.u_end.len() {
        let next = a.u_end[i].min(b.u_end[j]);
        if next > u {
            let d0 = a.eval(i, u) - b.eval(j, u);
            let d1 = a.eval(i, next) - b.eval(j, next);
            total += affine_power_integral(d0, d1, next - u, p);
            u = next;
        }
        if a.u_end[i] <= next {
            i += 1;
        }
        if b.u_end[j] <= next {
            j += 1;
        }
    }
    Ok(total)
}

/// `int |F(x) - G(x)| dx` over `range` by adaptive quadrature.
pub fn w1_cdf_1d<F, G>(f: F, g: G, range: (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let (a, b) = range;
    if !(b > a) {
        return Err(invalid(format!("empty range [{a}, {b}]")));
    }
    for (name, cdf) in [("F", &f as &dyn Fn(f64) -> f64), ("G", &g)] {
        let (lo, hi) = (cdf(a), cdf(b));
        if lo.abs() > 1e-6 || (hi - 1.0).abs() > 1e-6 {
            return Err(Error::NotACdf(format!(
                "{name}({a}) = {lo}, {name}({b}) = {hi}"
            )));
        }
    }
    let r = quadrature::integrate(|x| (f(x) - g(x)).abs(), a, b, 1e-12, 1e-12);
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_integral_cases() {
        assert!((affine_power_integral(1.0, 1.0, 2.0, 3.0) - 2.0).abs() < 1e-15);
        // int_0^1 u^2 du
        assert!((affine_power_integral(0.0, 1.0, 1.0, 2.0) - 1.0 / 3.0).abs() < 1e-15);
        // int_0^1 |2u - 1| du = 1/2
        assert!((affine_power_integral(-1.0, 1.0, 1.0, 1.0) - 0.5).abs() < 1e-15);
        let near = affine_power_integral(1.0, 1.0 + 1e-9, 1.0, 2.5);
        assert!((near - (1.0 + 0.5e-9f64).powf(2.5)).abs() < 1e-14);
    }
}
