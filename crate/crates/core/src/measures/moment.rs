use super::linear::LinearMap;
use super::sample::SampleBatch;
use crate::error::{invalid, Error, Result};
use crate::grid::GridDensity;

/// Moment constraint defining the classes `D_A(M,p)` (and `C_A(M,p)` when
/// the coordinates of `AX` are independent).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBound {
    pub p: f64,
    pub m: f64,
    pub independent_coords: bool,
}

impl MomentBound {
    pub fn new(p: f64, m: f64, independent_coords: bool) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(invalid(format!("order p = {p} must be at least 1")));
        }
        if !(m > 0.0) {
            return Err(invalid(format!("moment bound M = {m} must be positive")));
        }
        Ok(Self {
            p,
            m,
            independent_coords,
        })
    }

    pub fn contains(&self, value: &MomentValue) -> bool {
        value.value <= self.m
    }
}

/// Input to [`moment_functional`].
#[derive(Debug, Clone, Copy)]
pub enum MomentInput<'a> {
    Empirical(&'a SampleBatch),
    Density(&'a GridDensity),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentValue {
    /// Supremum over coordinates.
    pub value: f64,
    pub per_coordinate: Vec<f64>,
    /// Set when the grid boundary carries a non-negligible share of the
    /// integrand, i.e. the grid extent truncates a heavy tail.
    pub truncated: bool,
}

/// Integrand `(1 + |y_j|^{2p+2}) prod_{l != j} (1 + y_l^2)` at `y = A x`.
fn weight(y: &[f64], j: usize, p: f64) -> f64 {
    let mut w = 1.0 + y[j].abs().powf(2.0 * p + 2.0);
    for (l, v) in y.iter().enumerate() {
        if l != j {
            w *= 1.0 + v * v;
        }
    }
    w
}

/// `sup_j E[(1+|(AX)_j|^{2p+2}) prod_{l != j} (1+(AX)_l^2)]`: plug-in average
/// for samples, tensor trapezoid for grid densities.
pub fn moment_functional(input: MomentInput<'_>, map: &LinearMap, p: f64) -> Result<MomentValue> {
    if !(p >= 1.0) {
        return Err(invalid(format!("order p = {p} must be at least 1")));
    }
    let d = map.dim();
    let mut y = vec![0.0; d];
    match input {
        MomentInput::Empirical(batch) => {
            if batch.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: batch.dim(),
                });
            }
            let mut sums = vec![0.0; d];
            for row in batch.rows() {
                map.apply_point(row, &mut y);
                for (j, s) in sums.iter_mut().enumerate() {
                    *s += weight(&y, j, p);
                }
            }
            let n = batch.len() as f64;
            let per_coordinate: Vec<f64> = sums.into_iter().map(|s| s / n).collect();
            let value = per_coordinate
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(MomentValue {
                value,
                per_coordinate,
                truncated: false,
            })
        }
        MomentInput::Density(g) => {
            if g.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: g.dim(),
                });
            }
            let w = g.weights();
            let mut x = vec![0.0; d];
            let mut idx = vec![0usize; d];
            let mut totals = vec![0.0; d];
            let mut edge = vec![0.0; d];
            for (flat, (&v, &wt)) in g.values().iter().zip(&w).enumerate() {
                if v == 0.0 || wt == 0.0 {
                    continue;
                }
                g.point(flat, &mut x);
                g.unravel(flat, &mut idx);
                let near_edge = idx
                    .iter()
                    .zip(g.axes())
                    .any(|(&i, a)| i < 2 || i + 2 >= a.count);
                map.apply_point(&x, &mut y);
                for j in 0..d {
                    let c = wt * v * weight(&y, j, p);
                    totals[j] += c;
                    if near_edge {
                        edge[j] += c.abs();
                    }
                }
            }
            let truncated = totals
                .iter()
                .zip(&edge)
                .any(|(t, e)| *e > 1e-3 * t.abs().max(f64::MIN_POSITIVE));
            let value = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(MomentValue {
                value,
                per_coordinate: totals,
                truncated,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;

    #[test]
    fn dirac_at_zero_has_unit_moment() {
        let b = SampleBatch::new(vec![0.0; 5], 1).unwrap();
        let v =
            moment_functional(MomentInput::Empirical(&b), &LinearMap::identity(1), 3.0).unwrap();
        assert_eq!(v.value, 1.0);
        let b2 = SampleBatch::new(vec![0.0, 0.0], 2).unwrap();
        let v =
            moment_functional(MomentInput::Empirical(&b2), &LinearMap::identity(2), 1.0).unwrap();
        assert_eq!(v.value, 1.0);
    }

    #[test]
    fn map_enters_the_functional() {
        let b = SampleBatch::new(vec![1.0, 0.0], 2).unwrap();
        let a = LinearMap::diagonal(&[2.0, 1.0]).unwrap();
        let v = moment_functional(MomentInput::Empirical(&b), &a, 1.0).unwrap();
        // y = (2, 0): j=0 -> 1 + 16, j=1 -> (1 + 0)(1 + 4)
        assert_eq!(v.per_coordinate, vec![17.0, 5.0]);
        assert_eq!(v.value, 17.0);
    }

    #[test]
    fn heavy_tail_flags_truncation() {
        let axis = Axis::new(-20.0, 20.0, 2001).unwrap();
        let cauchy = GridDensity::from_fn(vec![axis], |x| {
            1.0 / (std::f64::consts::PI * (1.0 + x[0] * x[0]))
        })
        .unwrap();
        let v =
            moment_functional(MomentInput::Density(&cauchy), &LinearMap::identity(1), 1.0).unwrap();
        assert!(v.truncated);
        let gauss = GridDensity::from_fn(vec![axis], |x| {
            (-0.5 * x[0] * x[0]).exp() / (2.0 * std::f64::consts::PI).sqrt()
        })
        .unwrap();
        let v =
            moment_functional(MomentInput::Density(&gauss), &LinearMap::identity(1), 1.0).unwrap();
        assert!(!v.truncated);
        // E[1 + X^4] = 4 for a standard Gaussian
        assert!((v.value - 4.0).abs() < 1e-9, "{}", v.value);
    }
}
