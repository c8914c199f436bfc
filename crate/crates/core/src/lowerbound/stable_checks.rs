use super::convolution::direct_convolve;
use crate::error::{invalid, Error, Result};
use crate::interp::UniformTable;

const BASE_STEP: f64 = 1.0 / 64.0;
/// Relative size of the discarded tail `exp(-L^alpha)` that counts as exact.
const TRUNCATION_LEVEL: f64 = 1e-14;

/// `q_{alpha,k}`, the k-fold self-convolution of `exp(-|x|^alpha)`, by direct
/// summation of positive terms (relative accuracy in the tails) at steps
/// `h` and `2h` with one Richardson step.
#[derive(Debug, Clone)]
pub struct DirectPoweredTable {
    pub alpha: f64,
    pub k: u32,
    pub table: UniformTable,
    /// Largest relative Richardson correction, a proxy for the table error.
    pub error_estimate: f64,
    /// The input was cut at `|x| = radius` while its tail was still above
    /// the truncation level.
    pub truncated: bool,
    pub radius: f64,
}

impl DirectPoweredTable {
    pub fn build(alpha: f64, k: u32, half_width: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) || k == 0 {
            return Err(invalid(format!(
                "need alpha in (0,2) and k >= 1, got {alpha}, {k}"
            )));
        }
        if !(half_width > 0.0) {
            return Err(invalid("half width must be positive"));
        }
        let radius = (3.0 * half_width).max(10.0);
        let truncated = k > 1 && (-radius.powf(alpha)).exp() > TRUNCATION_LEVEL;
        let half_coarse = (radius / (2.0 * BASE_STEP)).ceil() as usize;
        let fine = power(alpha, k, BASE_STEP, 2 * half_coarse);
        let coarse = power(alpha, k, 2.0 * BASE_STEP, half_coarse);
        let gain = 2f64.powf((1.0 + alpha).min(2.0)) - 1.0;
        let mut error_estimate: f64 = 0.0;
        let values: Vec<f64> = coarse
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let f = fine[2 * i];
                let corr = (f - c) / gain;
                if f > 0.0 {
                    error_estimate = error_estimate.max((corr / f).abs());
                }
                f + corr
            })
            .collect();
        let step = 2.0 * BASE_STEP;
        Ok(Self {
            alpha,
            k,
            table: UniformTable::new(-(half_coarse as f64) * step, step, values),
            error_estimate,
            truncated,
            radius: half_coarse as f64 * step,
        })
    }

    pub fn step(&self) -> f64 {
        self.table.step
    }

    /// Value at `x`, cubic between nodes; zero outside the table.
    pub fn eval(&self, x: f64) -> f64 {
        self.table.cubic(x, 0.0)
    }

    pub fn q0(&self) -> f64 {
        self.table.values[(self.table.values.len() - 1) / 2]
    }

    /// Nodes `x` with `|x| <= half_width`, as `(x, q(x))`.
    pub fn nodes_within(&self, half_width: f64) -> Vec<(f64, f64)> {
        (0..self.table.values.len())
            .map(|i| (self.table.node(i), self.table.values[i]))
            .filter(|(x, _)| x.abs() <= half_width + 1e-12)
            .collect()
    }
}

/// `q_{alpha,k}` on `2 half + 1` nodes of step `h`.
fn power(alpha: f64, k: u32, h: f64, half: usize) -> Vec<f64> {
    let base: Vec<f64> = (0..=2 * half)
        .map(|i| (-((i as f64 - half as f64) * h).abs().powf(alpha)).exp())
        .collect();
    let mut acc = base.clone();
    for _ in 1..k {
        let full = direct_convolve(&acc, &base, h);
        acc = full[half..half + 2 * half + 1].to_vec();
    }
    acc
}

#[derive(Debug, Clone)]
pub struct StableSandwich {
    pub alpha: f64,
    pub k: u32,
    /// `min q(x) exp(|x|^alpha)`.
    pub a_fit: f64,
    /// `max q(x) exp(|x|^alpha / 2^{(k-1) alpha})`.
    pub b_fit: f64,
    pub pass: bool,
    /// Largest `|x|` on the grid where `q` is still a normal float.
    pub reliable_radius: f64,
    pub truncated: bool,
    pub rows: Vec<(f64, f64)>,
}

/// Two-sided exponential sandwich of `q_{alpha,k}` on `[-half_width, half_width]`.
pub fn verify_stable_convolution(alpha: f64, k: u32, half_width: f64) -> Result<StableSandwich> {
    let table = DirectPoweredTable::build(alpha, k, half_width)?;
    let rows = table.nodes_within(half_width);
    let reliable_radius = rows
        .iter()
        .filter(|(_, q)| q.is_normal())
        .map(|(x, _)| x.abs())
        .fold(0.0, f64::max);
    if reliable_radius < half_width - table.step() {
        log::warn!("q_{{{alpha},{k}}} underflows beyond |x| = {reliable_radius}; range truncated");
    }
    let spread = 2f64.powf((k as f64 - 1.0) * alpha);
    let usable = rows.iter().filter(|(x, _)| x.abs() <= reliable_radius);
    let (mut a_fit, mut b_fit) = (f64::INFINITY, 0.0f64);
    for &(x, q) in usable {
        let e = x.abs().powf(alpha);
        a_fit = a_fit.min(q * e.exp());
        b_fit = b_fit.max(q * (e / spread).exp());
    }
    let pass = a_fit > 0.0 && a_fit.is_finite() && b_fit > 0.0 && b_fit.is_finite();
    Ok(StableSandwich {
        alpha,
        k,
        a_fit,
        b_fit,
        pass,
        reliable_radius,
        truncated: table.truncated,
        rows,
    })
}

#[derive(Debug, Clone)]
pub struct RGrowthTable {
    pub alpha: f64,
    pub k: u32,
    pub ell: usize,
    /// `(x, |r^{(ell)}(x)| exp(-|x|^alpha))`.
    pub rows: Vec<(f64, f64)>,
    /// `min r(x) exp(-|x|^alpha / 2^{(k-1) alpha})`.
    pub lower_constant: f64,
    /// Largest row value.
    pub upper_constant: f64,
    /// Rows on the outer half stay below twice the inner-half maximum.
    pub bounded: bool,
}

/// Growth of the derivatives of `r_{alpha,k} = q(0) / q` by central
/// finite differences on the direct table.
pub fn verify_r_derivative_growth(
    alpha: f64,
    k: u32,
    ell: usize,
    x_grid: &[f64],
) -> Result<RGrowthTable> {
    let max_ell = if alpha < 1.0 {
        k as usize - 1
    } else {
        k as usize
    };
    if ell > max_ell {
        return Err(invalid(format!(
            "derivative order {ell} exceeds {max_ell} for alpha = {alpha}, k = {k}"
        )));
    }
    if x_grid.is_empty() {
        return Err(invalid("empty evaluation grid"));
    }
    let reach = x_grid.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let table = DirectPoweredTable::build(alpha, k, reach + 1.0)?;
    let q0 = table.q0();
    let delta = 2.0 * table.step();
    let r = |x: f64| q0 / table.eval(x);
    let binom = |n: usize, j: usize| -> f64 {
        (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    let eps = table.error_estimate.max(1e-13);
    let spread = 2f64.powf((k as f64 - 1.0) * alpha);
    let mut rows = Vec::with_capacity(x_grid.len());
    let mut lower_constant = f64::INFINITY;
    for &x in x_grid {
        let (mut d, mut scale) = (0.0, 0.0);
        for j in 0..=ell {
            let c = binom(ell, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
            let v = r(x + (ell as f64 / 2.0 - j as f64) * delta);
            d += c * v;
            scale += c.abs() * v.abs();
        }
        let h_pow = delta.powi(ell as i32);
        d /= h_pow;
        let noise = eps * scale / h_pow;
        let rx = r(x);
        if !(rx.is_finite()) || noise > 0.1 * d.abs() + 1e-3 * rx {
            return Err(Error::Resolution(format!(
                "finite-difference noise {noise:e} swamps r^({ell})({x}) = {d:e}; refine the transform table"
            )));
        }
        let e = x.abs().powf(alpha);
        rows.push((x, d.abs() * (-e).exp()));
        lower_constant = lower_constant.min(rx * (-e / spread).exp());
    }
    let upper_constant = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let inner = rows
        .iter()
        .filter(|(x, _)| x.abs() <= reach / 2.0)
        .map(|r| r.1)
        .fold(0.0, f64::max);
    let outer = rows
        .iter()
        .filter(|(x, _)| x.abs() > reach / 2.0)
        .map(|r| r.1)
        .fold(0.0, f64::max);
    let bounded = outer <= 2.0 * inner + 1e-300 && upper_constant.is_finite();
    Ok(RGrowthTable {
        alpha,
        k,
        ell,
        rows,
        lower_constant,
        upper_constant,
        bounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_case() {
        let s = verify_stable_convolution(1.3, 1, 5.0).unwrap();
        assert!((s.a_fit - 1.0).abs() < 1e-12 && s.pass && !s.truncated);
    }

    #[test]
    fn laplace_pair_closed_form() {
        let s = verify_stable_convolution(1.0, 2, 20.0).unwrap();
        for &(x, q) in &s.rows {
            let exact = (1.0 + x.abs()) * (-x.abs()).exp();
            assert!((q - exact).abs() < 1e-6, "x={x}: {q} vs {exact}");
            assert!((q - exact).abs() < 1e-6 * exact, "relative at x={x}");
        }
        let g = verify_r_derivative_growth(1.0, 2, 0, &[0.0, 1.0, 5.0, 10.0]).unwrap();
        assert!((g.rows[0].1 - 1.0).abs() < 1e-9);
        for &(x, v) in &g.rows {
            assert!((v - 1.0 / (1.0 + x.abs())).abs() < 1e-6);
        }
    }
}
