//! Wasserstein distances: exact 1-D formulas, discrete optimal transport and
//! grid quantization.

mod one_d;
mod simplex;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::GridDensity;

pub use one_d::{w1_cdf_1d, wp_quantile_1d, wp_quantile_1d_power, Measure1d};

/// Default bound on `m * m'` cost entries for [`wp_discrete`].
pub const DEFAULT_COST_CAP: usize = 4_000_000;
/// Atoms per measure used by [`wp_grid`] when `d >= 2`.
pub const DEFAULT_MAX_ATOMS: usize = 2000;

/// Weighted point cloud with unique support points and unit total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    support: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
}

impl DiscreteMeasure {
    /// `support` is row-major `m x dim`. Equal points are merged and
    /// zero-weight atoms dropped; atoms end up in lexicographic order.
    pub fn new(support: Vec<f64>, dim: usize, weights: Vec<f64>) -> Result<Self> {
        let m = Self::build(support, dim, weights)?;
        let total: f64 = m.weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(invalid(format!("weights sum to {total}, expected 1")));
        }
        Ok(m)
    }

    /// Like [`DiscreteMeasure::new`] but rescales positive weights to sum to one.
    pub fn normalized(support: Vec<f64>, dim: usize, weights: Vec<f64>) -> Result<Self> {
        let mut m = Self::build(support, dim, weights)?;
        let total: f64 = m.weights.iter().sum();
        if !(total > 0.0) {
            return Err(invalid("measure has no positive mass"));
        }
        m.weights.iter_mut().for_each(|w| *w /= total);
        Ok(m)
    }

    pub fn uniform(support: Vec<f64>, dim: usize) -> Result<Self> {
        let m = if dim == 0 { 0 } else { support.len() / dim };
        Self::normalized(support, dim, vec![1.0; m])
    }

    pub fn dirac(point: &[f64]) -> Self {
        Self {
            support: point.to_vec(),
            weights: vec![1.0],
            dim: point.len(),
        }
    }

    fn build(support: Vec<f64>, dim: usize, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 || support.len() != weights.len() * dim {
            return Err(invalid(format!(
                "{} coordinates do not form {} points of dimension {dim}",
                support.len(),
                weights.len()
            )));
        }
        if weights.is_empty() {
            return Err(invalid("measure needs at least one atom"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(invalid(format!("weight {w} is not a nonnegative number")));
        }
        if support.iter().any(|x| !x.is_finite()) {
            return Err(invalid("support has non-finite coordinates"));
        }
        let row = |i: usize| &support[i * dim..(i + 1) * dim];
        let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        order.sort_by(|&a, &b| {
            row(a)
                .iter()
                .zip(row(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut out_s: Vec<f64> = Vec::with_capacity(order.len() * dim);
        let mut out_w: Vec<f64> = Vec::with_capacity(order.len());
        for i in order {
            let same = !out_w.is_empty() && out_s[out_s.len() - dim..] == *row(i);
            if same {
                *out_w.last_mut().expect("nonempty") += weights[i];
            } else {
                out_s.extend_from_slice(row(i));
                out_w.push(weights[i]);
            }
        }
        if out_w.is_empty() {
            return Err(invalid("measure has no positive mass"));
        }
        Ok(Self {
            support: out_s,
            weights: out_w,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.support[i * self.dim..(i + 1) * self.dim]
    }

    /// Image under `x -> f(x)`, merging atoms that collide.
    pub fn map_points<F: FnMut(&[f64], &mut [f64])>(
        &self,
        out_dim: usize,
        mut f: F,
    ) -> Result<Self> {
        let mut support = vec![0.0; self.len() * out_dim];
        for (i, out) in support.chunks_exact_mut(out_dim).enumerate() {
            f(self.point(i), out);
        }
        Self::normalized(support, out_dim, self.weights.clone())
    }

    /// Marginal on coordinate `j`.
    pub fn marginal(&self, j: usize) -> Result<Self> {
        if j >= self.dim {
            return Err(Error::CoordinateOutOfRange {
                index: j,
                dim: self.dim,
            });
        }
        self.map_points(1, |x, out| out[0] = x[j])
    }
}

/// Optimal coupling between two discrete measures.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub source: DiscreteMeasure,
    pub target: DiscreteMeasure,
    /// Nonzero entries `(i, j, mass)` of the coupling matrix, sorted.
    pub coupling: Vec<(usize, usize, f64)>,
    /// `sum_ij pi_ij |x_i - y_j|^p`.
    pub cost_p: f64,
    pub p: f64,
}

impl TransportPlan {
    /// `W_p = cost_p^{1/p}`.
    pub fn distance(&self) -> f64 {
        self.cost_p.max(0.0).powf(1.0 / self.p)
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.target.len()]; self.source.len()];
        for &(i, j, w) in &self.coupling {
            out[i][j] += w;
        }
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.source.len()];
        for &(i, _, w) in &self.coupling {
            out[i] += w;
        }
        out
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.target.len()];
        for &(_, j, w) in &self.coupling {
            out[j] += w;
        }
        out
    }
}

fn ground_cost(x: &[f64], y: &[f64], p: f64) -> f64 {
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if p == 2.0 {
        sq
    } else if p == 1.0 {
        sq.sqrt()
    } else {
        sq.sqrt().powf(p)
    }
}

fn check_order(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!(
            "order p = {p} must be a finite value >= 1"
        )));
    }
    Ok(())
}

/// Exact optimal transport with the default cost-entry cap.
pub fn wp_discrete(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<TransportPlan> {
    wp_discrete_capped(mu, nu, p, DEFAULT_COST_CAP)
}

/// Exact optimal transport by network simplex.
pub fn wp_discrete_capped(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
    cap: usize,
) -> Result<TransportPlan> {
    check_order(p)?;
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    let (m, n) = (mu.len(), nu.len());
    let entries = m.saturating_mul(n);
    if entries > cap {
        return Err(Error::ProblemTooLarge { entries, cap });
    }
    let mut cost = vec![0.0; entries];
    cost.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let x = mu.point(i);
        for (j, c) in row.iter_mut().enumerate() {
            *c = ground_cost(x, nu.point(j), p);
        }
    });
    let sol = simplex::solve(&cost, mu.weights(), nu.weights())?;
    if sol.artificial_flow > 1e-9 {
        return Err(Error::Infeasible(format!(
            "residual artificial flow {}",
            sol.artificial_flow
        )));
    }
    log::debug!("network simplex: {m}x{n} in {} pivots", sol.pivots);
    let cost_p = sol
        .entries
        .iter()
        .map(|&(i, j, w)| w * cost[i * n + j])
        .sum();
    Ok(TransportPlan {
        source: mu.clone(),
        target: nu.clone(),
        coupling: sol.entries,
        cost_p,
        p,
    })
}

/// Atoms at cell centers carrying trapezoidal cell masses. Blocks of cells
/// are merged into their mass-weighted centroid when the cell count exceeds
/// `max_atoms`.
pub fn quantize(gd: &GridDensity, max_atoms: usize) -> Result<DiscreteMeasure> {
    let d = gd.dim();
    let max_atoms = max_atoms.max(1);
    let cells: Vec<usize> = gd.axes().iter().map(|a| a.count - 1).collect();
    let mut factor = 1usize;
    let blocks = |f: usize| cells.iter().map(|c| c.div_ceil(f)).product::<usize>();
    while blocks(factor) > max_atoms {
        factor += 1;
    }
    let block_counts: Vec<usize> = cells.iter().map(|c| c.div_ceil(factor)).collect();
    let nblocks: usize = block_counts.iter().product();
    let mut mass = vec![0.0; nblocks];
    let mut moment = vec![0.0; nblocks * d];

    let strides: Vec<usize> = {
        let mut s = vec![1usize; d];
        for j in (0..d.saturating_sub(1)).rev() {
            s[j] = s[j + 1] * gd.axis(j + 1).count;
        }
        s
    };
    let vol = gd.cell_volume();
    let corners = 1usize << d;
    let total_cells: usize = cells.iter().product();
    let values = gd.values();
    let mut idx = vec![0usize; d];
    let mut center = vec![0.0; d];
    for flat in 0..total_cells {
        let mut rem = flat;
        for j in (0..d).rev() {
            idx[j] = rem % cells[j];
            rem /= cells[j];
        }
        let mut base = 0usize;
        for j in 0..d {
            base += idx[j] * strides[j];
            let a = gd.axis(j);
            center[j] = a.min + (idx[j] as f64 + 0.5) * a.spacing();
        }
        let mut s = 0.0;
        for c in 0..corners {
            let mut off = base;
            for j in 0..d {
                if (c >> j) & 1 == 1 {
                    off += strides[j];
                }
            }
            s += values[off];
        }
        let w = (vol * s / corners as f64).max(0.0);
        let mut b = 0usize;
        for j in 0..d {
            b = b * block_counts[j] + idx[j] / factor;
        }
        mass[b] += w;
        for j in 0..d {
            moment[b * d + j] += w * center[j];
        }
    }
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return Err(invalid("density has no positive mass"));
    }
    let floor = 1e-12 * total;
    let mut support = Vec::new();
    let mut weights = Vec::new();
    for (b, &w) in mass.iter().enumerate() {
        if w > floor {
            weights.push(w);
            support.extend(moment[b * d..(b + 1) * d].iter().map(|m| m / w));
        }
    }
    DiscreteMeasure::normalized(support, d, weights)
}

/// `W_p` between grid densities: exact quantile formula for `d = 1`,
/// quantization plus network simplex otherwise.
pub fn wp_grid(a: &GridDensity, b: &GridDensity, p: f64) -> Result<f64> {
    Ok(wp_grid_power(a, b, p, DEFAULT_MAX_ATOMS)?.powf(1.0 / p))
}

/// `W_p^p` between grid densities with an explicit atom budget for `d >= 2`.
pub fn wp_grid_power(a: &GridDensity, b: &GridDensity, p: f64, max_atoms: usize) -> Result<f64> {
    check_order(p)?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if a.dim() == 1 {
        return wp_quantile_1d_power(a, b, p);
    }
    let qa = quantize(a, max_atoms)?;
    let qb = quantize(b, max_atoms)?;
    Ok(wp_discrete(&qa, &qb, p)?.cost_p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_merge() {
        let m = DiscreteMeasure::new(vec![1.0, 0.0, 1.0, 2.0], 1, vec![0.25, 0.25, 0.25, 0.25])
            .unwrap();
        assert_eq!(m.support(), &[0.0, 1.0, 2.0]);
        assert_eq!(m.weights(), &[0.25, 0.5, 0.25]);
        assert!(DiscreteMeasure::new(vec![0.0], 1, vec![0.5]).is_err());
    }

    #[test]
    fn simplex_small_instance() {
        // 2x2 with unequal weights: optimum keeps mass in place where possible
        let mu = DiscreteMeasure::new(vec![0.0, 1.0], 1, vec![0.3, 0.7]).unwrap();
        let nu = DiscreteMeasure::new(vec![0.0, 1.0], 1, vec![0.6, 0.4]).unwrap();
        let plan = wp_discrete(&mu, &nu, 1.0).unwrap();
        assert!((plan.cost_p - 0.3).abs() < 1e-15);
        let rows = plan.row_sums();
        assert!((rows[0] - 0.3).abs() < 1e-15 && (rows[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let mu = DiscreteMeasure::uniform((0..10).map(f64::from).collect(), 1).unwrap();
        assert!(matches!(
            wp_discrete_capped(&mu, &mu, 1.0, 50),
            Err(Error::ProblemTooLarge {
                entries: 100,
                cap: 50
            })
        ));
    }
}
