//! Sinc-power smoothing kernel and its deconvolution counterpart.
//!
//! `k(x) = c_p (m sin(x/m) / x)^m` with `m = 2 ceil(p/2) + 2`. Its Fourier
//! transform `k*` is the density of a sum of `m` uniforms on `[-1/m, 1/m]`
//! rescaled to `k*(0) = 1`: a degree `m-1` B-spline supported on `[-1, 1]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::interp::UniformTable;
use crate::measures::{CoordinateNoise, NoiseModel};
use crate::quadrature;

/// Default number of trapezoid intervals on `u in [-1, 1]`.
pub const DEFAULT_QUADRATURE_NODES: usize = 4096;

/// `m = 2 ceil(p/2) + 2`.
pub fn kernel_order(p: f64) -> Result<usize> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("kernel order needs p >= 1, got {p}")));
    }
    Ok(2 * (p / 2.0).ceil() as usize + 2)
}

/// Irwin-Hall density of a sum of `m` uniforms on `[0, 1]`.
fn irwin_hall(m: usize, s: f64) -> f64 {
    if s <= 0.0 || s >= m as f64 {
        return 0.0;
    }
    // the alternating sum is better conditioned on the lower half
    let s = if s > 0.5 * m as f64 { m as f64 - s } else { s };
    let mut acc = 0.0;
    let mut binom = 1.0;
    let mut fact = 1.0;
    for i in 1..m {
        fact *= i as f64;
    }
    for j in 0..=(s.floor() as usize).min(m) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * (s - j as f64).powi(m as i32 - 1);
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    acc / fact
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub p: f64,
    pub m: usize,
    /// Normalizing constant with `int k = 1`.
    pub c_p: f64,
    center_density: f64,
}

impl KernelSpec {
    pub fn new(p: f64) -> Result<Self> {
        let m = kernel_order(p)?;
        let center_density = irwin_hall(m, 0.5 * m as f64);
        // k*(0) = 2 pi c_p B(0) with B(0) = (m/2) f_IH(m/2)
        let c_p = 1.0 / (PI * m as f64 * center_density);
        Ok(Self {
            p,
            m,
            c_p,
            center_density,
        })
    }

    /// `ceil(p)`, the smoothness the upper bound asks of `k*`.
    pub fn ceil_p(&self) -> usize {
        self.p.ceil() as usize
    }

    /// `k(x)`, with the removable singularity at zero filled in.
    pub fn density(&self, x: f64) -> f64 {
        let y = x / self.m as f64;
        let sinc = if y.abs() < 1e-4 {
            1.0 - y * y / 6.0
        } else {
            y.sin() / y
        };
        self.c_p * sinc.powi(self.m as i32)
    }

    /// `k*(u)`; exactly zero for `|u| >= 1`.
    pub fn ft(&self, u: f64) -> f64 {
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let m = self.m as f64;
        irwin_hall(self.m, 0.5 * m * (1.0 - u.abs())) / self.center_density
    }
}

/// `kernel_density(spec, x)`.
pub fn kernel_density(spec: &KernelSpec, x: f64) -> f64 {
    spec.density(x)
}

/// `kernel_ft(spec, u)`.
pub fn kernel_ft(spec: &KernelSpec, u: f64) -> f64 {
    spec.ft(u)
}

/// Spectral weights `trap_w * k*(u) / mu*(u/h)` on a uniform `u` grid.
struct Spectrum {
    nodes: Vec<f64>,
    weights: Vec<Complex64>,
    symmetric: bool,
}

impl Spectrum {
    fn build(spec: &KernelSpec, noise: &CoordinateNoise, h: f64, intervals: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(invalid(format!("bandwidth must be positive, got {h}")));
        }
        if intervals < 2 || intervals % 2 != 0 {
            return Err(invalid("quadrature node count must be even and at least 2"));
        }
        let du = 2.0 / intervals as f64;
        let mut nodes = Vec::with_capacity(intervals + 1);
        let mut weights = Vec::with_capacity(intervals + 1);
        for i in 0..=intervals {
            let u = -1.0 + du * i as f64;
            let ks = spec.ft(u);
            let w = if ks == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let phi = noise.char_fn(u / h)?;
                let modulus = phi.norm();
                if !(modulus > 1e-300) {
                    return Err(Error::DivisionSingularity { u, modulus });
                }
                du * ks / phi
            };
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(Error::DivisionSingularity {
                    u,
                    modulus: noise.char_fn(u / h)?.norm(),
                });
            }
            nodes.push(u);
            weights.push(w);
        }
        // endpoints carry k* = 0 so the trapezoid halves are immaterial
        Ok(Self {
            nodes,
            weights,
            symmetric: noise.is_symmetric(),
        })
    }

    /// `(1/2pi) sum_k w_k e^{i u_k x}`.
    fn eval(&self, x: f64) -> Complex64 {
        let n = self.nodes.len();
        if self.symmetric {
            // real even weights: cosine sum over u >= 0
            let mid = n / 2;
            let mut acc = self.weights[mid].re;
            let step = Complex64::from_polar(1.0, (self.nodes[1] - self.nodes[0]) * x);
            let mut rot = step;
            for k in 1..=mid {
                if k % 64 == 0 {
                    rot = Complex64::from_polar(1.0, self.nodes[mid + k] * x);
                }
                acc += 2.0 * self.weights[mid + k].re * rot.re;
                rot *= step;
            }
            Complex64::new(acc / (2.0 * PI), 0.0)
        } else {
            let step = Complex64::from_polar(1.0, (self.nodes[1] - self.nodes[0]) * x);
            let mut rot = Complex64::from_polar(1.0, self.nodes[0] * x);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                if k % 64 == 0 {
                    rot = Complex64::from_polar(1.0, self.nodes[k] * x);
                }
                acc += self.weights[k] * rot;
                rot *= step;
            }
            acc / (2.0 * PI)
        }
    }
}

/// Tabulated deconvolution kernel `k~_{j,h}`.
#[derive(Debug, Clone)]
pub struct DeconvKernelTable {
    pub spec: KernelSpec,
    pub coordinate: usize,
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub quadrature_nodes: usize,
    /// Largest `|Im|` seen in the inverse transform.
    pub imag_residue: f64,
}

impl DeconvKernelTable {
    /// Largest change when the quadrature node count is doubled.
    pub fn refinement_delta(&self, noise: &NoiseModel) -> Result<f64> {
        let fine = deconv_kernel_with(
            &self.spec,
            noise,
            self.coordinate,
            self.bandwidth,
            &self.grid,
            2 * self.quadrature_nodes,
        )?;
        Ok(self
            .values
            .iter()
            .zip(&fine.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// `k~_{j,h}(x) = (1/2pi) int_{-1}^{1} e^{iux} k*(u) / mu*_{eps,j}(u/h) du`
/// at each abscissa, by the trapezoid rule with the default node count.
pub fn deconv_kernel(
    spec: &KernelSpec,
    noise: &NoiseModel,
    j: usize,
    h: f64,
    grid: &[f64],
) -> Result<DeconvKernelTable> {
    deconv_kernel_with(spec, noise, j, h, grid, DEFAULT_QUADRATURE_NODES)
}

pub fn deconv_kernel_with(
    spec: &KernelSpec,
    noise: &NoiseModel,
    j: usize,
    h: f64,
    grid: &[f64],
    quadrature_nodes: usize,
) -> Result<DeconvKernelTable> {
    let coord = noise.coord(j)?;
    let spectrum = Spectrum::build(spec, coord, h, quadrature_nodes)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut imag_residue: f64 = 0.0;
    for &x in grid {
        let z = spectrum.eval(x);
        imag_residue = imag_residue.max(z.im.abs());
        values.push(z.re);
    }
    Ok(DeconvKernelTable {
        spec: *spec,
        coordinate: j,
        bandwidth: h,
        grid: grid.to_vec(),
        values,
        quadrature_nodes,
        imag_residue,
    })
}

/// `k~_{j,h}` on the uniform grid `start + i * step`, ready for linear
/// interpolation.
pub(crate) fn deconv_kernel_uniform(
    spec: &KernelSpec,
    coord: &CoordinateNoise,
    h: f64,
    start: f64,
    step: f64,
    count: usize,
) -> Result<UniformTable> {
    let spectrum = Spectrum::build(spec, coord, h, DEFAULT_QUADRATURE_NODES)?;
    let values = (0..count)
        .map(|i| spectrum.eval(start + step * i as f64).re)
        .collect();
    Ok(UniformTable::new(start, step, values))
}

/// Diagnostic integrals bounding the stochastic term of the estimator's risk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceTerms {
    pub i: f64,
    pub j: f64,
}

/// `I_j(h) = sqrt(int_{-1/h}^{1/h} r^2 + r'^2)` and
/// `J_j(h) = sqrt(int r^2 + (r^{(q+1)})^2) + sum_{k=1}^{q} h^{q+1-k} sqrt(int (r^{(k)})^2)`
/// with `q = ceil(p)` and `r = 1/mu*_{eps,j}`.
pub fn variance_bound_terms(
    spec: &KernelSpec,
    noise: &NoiseModel,
    j: usize,
    h: f64,
) -> Result<VarianceTerms> {
    if !(h > 0.0) {
        return Err(invalid(format!("bandwidth must be positive, got {h}")));
    }
    let coord = noise.coord(j)?;
    let q = spec.ceil_p();
    let limit = 1.0 / h;
    let derivs = |u: f64| coord.reciprocal_derivatives(u, q + 1);

    // overflow guard: locate the largest finite range before integrating
    let finite_at = |u: f64| {
        derivs(u)
            .map(|v| v.iter().all(|x| x.is_finite()))
            .unwrap_or(false)
    };
    if !finite_at(limit) || !finite_at(-limit) {
        let (mut lo, mut hi) = (0.0, limit);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if finite_at(mid) && finite_at(-mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Err(Error::Overflow {
            max_inverse_bandwidth: lo,
        });
    }

    let mut failure = None;
    let mut integral = |f: &dyn Fn(&[f64]) -> f64| -> f64 {
        let r = quadrature::integrate(
            |u| match derivs(u) {
                Ok(v) => f(&v),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            -limit,
            limit,
            0.0,
            1e-10,
        );
        r.value
    };
    let i_term = integral(&|v| v[0] * v[0] + v[1] * v[1]).sqrt();
    let mut j_term = integral(&|v| v[0] * v[0] + v[q + 1] * v[q + 1]).sqrt();
    for k in 1..=q {
        j_term += h.powi((q + 1 - k) as i32) * integral(&|v| v[k] * v[k]).sqrt();
    }
    if let Some(e) = failure {
        return Err(e);
    }
    if !(i_term.is_finite() && j_term.is_finite()) {
        return Err(Error::Overflow {
            max_inverse_bandwidth: limit,
        });
    }
    Ok(VarianceTerms {
        i: i_term,
        j: j_term,
    })
}
