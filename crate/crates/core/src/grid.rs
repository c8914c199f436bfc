//! Densities tabulated on rectangular uniform grids.

use crate::error::{invalid, Error, Result};
use crate::quadrature::{cumulative_trapezoid, trapezoid_weights};

/// One uniformly spaced grid axis with `count` nodes from `min` to `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(invalid(format!("axis needs at least 2 nodes, got {count}")));
        }
        if !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(invalid(format!(
                "axis range [{min}, {max}] must be finite with positive width"
            )));
        }
        Ok(Self { min, max, count })
    }

    /// Axis through `center` with the given spacing and `count` nodes.
    pub fn centered(center: f64, spacing: f64, count: usize) -> Result<Self> {
        let half = 0.5 * spacing * (count as f64 - 1.0);
        Self::new(center - half, center + half, count)
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.min + self.spacing() * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.count).map(|i| self.min + h * i as f64).collect()
    }

    pub fn trapezoid_weights(&self) -> Vec<f64> {
        trapezoid_weights(self.count, self.spacing())
    }

    /// Same spacing and nodes up to `tol` relative to the spacing.
    pub fn same_nodes(&self, other: &Axis, tol: f64) -> bool {
        self.count == other.count
            && (self.min - other.min).abs() <= tol * self.spacing()
            && (self.max - other.max).abs() <= tol * self.spacing()
    }
}

/// Real values on the tensor grid of `axes`, row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    axes: Vec<Axis>,
    values: Vec<f64>,
    normalized: bool,
}

impl GridDensity {
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        if axes.is_empty() {
            return Err(invalid("grid needs at least one axis"));
        }
        let size: usize = axes.iter().map(|a| a.count).product();
        if values.len() != size {
            return Err(invalid(format!(
                "grid of {size} nodes given {} values",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("grid values must be finite"));
        }
        Ok(Self {
            axes,
            values,
            normalized: false,
        })
    }

    pub fn from_fn<F: FnMut(&[f64]) -> f64>(axes: Vec<Axis>, mut f: F) -> Result<Self> {
        let size: usize = axes.iter().map(|a| a.count).product();
        let mut values = Vec::with_capacity(size);
        let mut x = vec![0.0; axes.len()];
        for flat in 0..size {
            let mut rem = flat;
            for (k, axis) in axes.iter().enumerate().rev() {
                x[k] = axis.node(rem % axis.count);
                rem /= axis.count;
            }
            values.push(f(&x));
        }
        Self::new(axes, values)
    }

    /// Builds a normalized density; fails unless values are non-negative
    /// and integrate to 1 within `tol`.
    pub fn normalized_from(axes: Vec<Axis>, values: Vec<f64>, tol: f64) -> Result<Self> {
        let mut g = Self::new(axes, values)?;
        if g.values.iter().any(|v| *v < 0.0) {
            return Err(invalid("normalized density has negative values"));
        }
        let mass = g.integral();
        if (mass - 1.0).abs() > tol {
            return Err(invalid(format!("normalized density has mass {mass}")));
        }
        g.normalized = true;
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, j: usize) -> &Axis {
        &self.axes[j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub(crate) fn set_normalized(&mut self, flag: bool) {
        self.normalized = flag;
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        self.normalized = false;
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Multi-index of a flat position.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for (k, axis) in self.axes.iter().enumerate().rev() {
            out[k] = flat % axis.count;
            flat /= axis.count;
        }
    }

    pub fn point(&self, flat: usize, out: &mut [f64]) {
        let mut idx = vec![0; self.dim()];
        self.unravel(flat, &mut idx);
        for (k, i) in idx.iter().enumerate() {
            out[k] = self.axes[k].node(*i);
        }
    }

    /// Tensor-product trapezoid weights, flattened like the values.
    pub fn weights(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = self.axes.iter().map(Axis::trapezoid_weights).collect();
        let mut out = vec![1.0; self.values.len()];
        let mut idx = vec![0; self.dim()];
        for (flat, w) in out.iter_mut().enumerate() {
            self.unravel(flat, &mut idx);
            for (k, i) in idx.iter().enumerate() {
                *w *= per_axis[k][*i];
            }
        }
        out
    }

    /// Trapezoidal integral.
    pub fn integral(&self) -> f64 {
        self.integrate_with(|_, v| v)
    }

    /// Trapezoidal integral of `f(x, value)`.
    pub fn integrate_with<F: FnMut(&[f64], f64) -> f64>(&self, mut f: F) -> f64 {
        let w = self.weights();
        let mut x = vec![0.0; self.dim()];
        let mut acc = 0.0;
        for (flat, (&v, &wt)) in self.values.iter().zip(&w).enumerate() {
            if wt == 0.0 {
                continue;
            }
            self.point(flat, &mut x);
            acc += wt * f(&x, v);
        }
        acc
    }

    /// Marginal along axis `j` by trapezoidal integration of the others.
    pub fn marginal(&self, j: usize) -> Result<GridDensity> {
        if j >= self.dim() {
            return Err(Error::CoordinateOutOfRange {
                index: j,
                dim: self.dim(),
            });
        }
        if self.dim() == 1 {
            return Ok(self.clone());
        }
        let per_axis: Vec<Vec<f64>> = self.axes.iter().map(Axis::trapezoid_weights).collect();
        let mut out = vec![0.0; self.axes[j].count];
        let mut idx = vec![0; self.dim()];
        for (flat, v) in self.values.iter().enumerate() {
            self.unravel(flat, &mut idx);
            let mut w = 1.0;
            for (k, i) in idx.iter().enumerate() {
                if k != j {
                    w *= per_axis[k][*i];
                }
            }
            out[idx[j]] += w * v;
        }
        let mut g = GridDensity::new(vec![self.axes[j]], out)?;
        g.normalized = self.normalized;
        Ok(g)
    }

    /// Multilinear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut base = Vec::with_capacity(d);
        let mut frac = Vec::with_capacity(d);
        for (k, axis) in self.axes.iter().enumerate() {
            let s = (x[k] - axis.min) / axis.spacing();
            let last = (axis.count - 1) as f64;
            if !(s >= -1e-9 && s <= last + 1e-9) {
                return 0.0;
            }
            let s = s.clamp(0.0, last);
            let i = (s.floor() as usize).min(axis.count - 2);
            base.push(i);
            frac.push(s - i as f64);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0;
            for k in 0..d {
                let bit = (corner >> k) & 1;
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
                flat = flat * self.axes[k].count + base[k] + bit;
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        acc
    }

    /// Normalized cumulative distribution at the nodes (1-D only).
    pub fn cdf_nodes(&self) -> Result<Vec<f64>> {
        self.require_1d()?;
        let mut c = cumulative_trapezoid(&self.values, self.axes[0].spacing());
        let total = *c.last().expect("axis has nodes");
        if !(total > 0.0) {
            return Err(invalid("density has no positive mass"));
        }
        for v in c.iter_mut() {
            *v /= total;
        }
        Ok(c)
    }

    /// CDF with linear interpolation between nodes (1-D only).
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let c = self.cdf_nodes()?;
        let axis = self.axes[0];
        if x <= axis.min {
            return Ok(0.0);
        }
        if x >= axis.max {
            return Ok(1.0);
        }
        let s = (x - axis.min) / axis.spacing();
        let i = (s.floor() as usize).min(axis.count - 2);
        let f = s - i as f64;
        Ok(c[i] + f * (c[i + 1] - c[i]))
    }

    /// Quantile by binary search on the node CDF (1-D only).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        let c = self.cdf_nodes()?;
        Ok(quantile_from_cdf(&self.axes[0], &c, u))
    }

    pub(crate) fn require_1d(&self) -> Result<()> {
        if self.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

/// Inverse of the piecewise-linear CDF through `(axis nodes, cdf)`.
pub(crate) fn quantile_from_cdf(axis: &Axis, cdf: &[f64], u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    // first node with cdf >= u
    let hi = cdf.partition_point(|&c| c < u);
    if hi == 0 {
        // flat leading zeros: the smallest x with F(x) >= u
        return axis.node(0);
    }
    if hi >= cdf.len() {
        return axis.max;
    }
    let lo = hi - 1;
    let (c0, c1) = (cdf[lo], cdf[hi]);
    let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 1.0 };
    axis.node(lo) + t * axis.spacing()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(min: f64, max: f64, n: usize) -> Axis {
        Axis::new(min, max, n).unwrap()
    }

    #[test]
    fn rejects_degenerate_axes() {
        assert!(Axis::new(0.0, 1.0, 1).is_err());
        assert!(Axis::new(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn integral_of_separable_function() {
        let g = GridDensity::from_fn(vec![axis(0.0, 1.0, 101), axis(-1.0, 1.0, 51)], |x| {
            x[0] * (1.0 + x[1])
        })
        .unwrap();
        // trapezoid is exact for bilinear integrands
        assert!((g.integral() - 1.0).abs() < 1e-12);
        let m = g.marginal(0).unwrap();
        assert!((m.values()[100] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation_is_exact_for_multilinear() {
        let g = GridDensity::from_fn(vec![axis(0.0, 2.0, 5), axis(0.0, 1.0, 3)], |x| {
            1.0 + 2.0 * x[0] + x[0] * x[1]
        })
        .unwrap();
        let v = g.interpolate(&[1.3, 0.7]);
        assert!((v - (1.0 + 2.6 + 1.3 * 0.7)).abs() < 1e-12);
        assert_eq!(g.interpolate(&[2.5, 0.5]), 0.0);
    }

    #[test]
    fn cdf_and_quantile_are_inverse() {
        let g = GridDensity::from_fn(vec![axis(-5.0, 5.0, 201)], |x| (-0.5 * x[0] * x[0]).exp())
            .unwrap();
        for &u in &[0.01, 0.3, 0.5, 0.77, 0.999] {
            let q = g.quantile(u).unwrap();
            assert!((g.cdf(q).unwrap() - u).abs() < 1e-12, "u={u}");
        }
        assert!(g.quantile(0.5).unwrap().abs() < 1e-12);
    }
}
