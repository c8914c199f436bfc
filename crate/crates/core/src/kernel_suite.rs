//! Numerical self-checks for the smoothing kernel and the deconvolution
//! kernels built from it.

use std::f64::consts::PI;

use crate::error::Result;
use crate::interp::UniformTable;
use crate::kernel::{deconv_kernel, KernelSpec};
use crate::measures::{CoordinateNoise, NoiseModel};
use crate::quadrature;

/// Range of the truncated space-domain transform.
pub const TRANSFORM_CUTOFF: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct KernelCheck {
    pub name: String,
    /// Worst observed deviation.
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl KernelCheck {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSuiteReport {
    pub spec: KernelSpec,
    pub checks: Vec<KernelCheck>,
}

impl KernelSuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&KernelCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// `int_{-L}^{L} f` for an even `f`, integrated panel by panel so that
/// oscillations never span more than one panel.
fn even_integral<F: FnMut(f64) -> f64>(mut f: F, limit: f64, panel: f64) -> f64 {
    let panels = (limit / panel).ceil() as usize;
    let width = limit / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let a = width * i as f64;
        total += quadrature::integrate(&mut f, a, a + width, 1e-17, 1e-14).value;
    }
    2.0 * total
}

/// Bound on `int_{|x| > L} k` for the cutoff `L`, which caps how far the
/// truncated transform can sit from `k*`.
pub fn truncation_tail(spec: &KernelSpec) -> f64 {
    let m = spec.m as f64;
    2.0 * spec.c_p * m.powi(spec.m as i32) / ((m - 1.0) * TRANSFORM_CUTOFF.powi(spec.m as i32 - 1))
}

/// Runs the kernel invariant suite for order `p`.
pub fn kernel_suite(p: f64) -> Result<KernelSuiteReport> {
    let spec = KernelSpec::new(p)?;
    let m = spec.m as f64;
    let mut checks = Vec::new();

    let mass = even_integral(|x| spec.density(x), TRANSFORM_CUTOFF, 2.0);
    checks.push(KernelCheck::new("mass", (mass - 1.0).abs(), 1e-6));

    let outside = (0..=400)
        .map(|i| 1.0 + 0.01 * i as f64)
        .map(|u| spec.ft(u).abs().max(spec.ft(-u).abs()));
    checks.push(KernelCheck::new(
        "support_exact",
        outside.fold(0.0, f64::max),
        0.0,
    ));

    let leak = [1.0, 1.1, 1.25, 1.5, 2.0, 3.0]
        .iter()
        .map(|&u| even_integral(|x| (u * x).cos() * spec.density(x), TRANSFORM_CUTOFF, 0.5).abs())
        .fold(0.0, f64::max);
    checks.push(KernelCheck::new("support_quadrature", leak, 1e-12));
    checks.push(KernelCheck::new(
        "support_quadrature_tail",
        leak,
        truncation_tail(&spec),
    ));

    let mut ft_excess: f64 = 0.0;
    for i in 0..=2000 {
        let u = -1.0 + 1e-3 * i as f64;
        let v = spec.ft(u);
        ft_excess = ft_excess.max(-v).max(v - 1.0);
    }
    checks.push(KernelCheck::new("ft_bounded", ft_excess, 0.0));

    let space = even_integral(|x| spec.density(x).powi(2), TRANSFORM_CUTOFF, 2.0);
    let knots: Vec<f64> = (0..=spec.m).map(|j| -1.0 + 2.0 * j as f64 / m).collect();
    let freq: f64 = knots
        .windows(2)
        .map(|w| quadrature::integrate(|u| spec.ft(u).powi(2), w[0], w[1], 1e-16, 1e-14).value)
        .sum::<f64>()
        / (2.0 * PI);
    checks.push(KernelCheck::new("plancherel", (space - freq).abs(), 1e-6));

    for (name, coord, sd) in [
        ("reconvolve_gaussian", CoordinateNoise::gaussian(1.0)?, 1.0),
        (
            "reconvolve_laplace",
            CoordinateNoise::laplace(1.0)?,
            2f64.sqrt(),
        ),
    ] {
        checks.push(KernelCheck::new(
            name,
            reconvolution_error(&spec, coord, 0.5, sd)?,
            1e-4,
        ));
    }
    Ok(KernelSuiteReport { spec, checks })
}

/// Sup over `|x| <= 10 sd` of `|[(1/h) k~(./h)] * g (x) - (1/h) k(x/h)|`,
/// the noise density `g` being integrated out to `30 sd`.
pub fn reconvolution_error(
    spec: &KernelSpec,
    coord: CoordinateNoise,
    h: f64,
    sd: f64,
) -> Result<f64> {
    let reach = 10.0 * sd;
    let tail = 30.0 * sd;
    let step = 1.0 / 64.0;
    let half = ((reach + tail) / h / step).ceil() as usize + 4;
    let nodes: Vec<f64> = (0..=2 * half)
        .map(|i| (i as f64 - half as f64) * step)
        .collect();
    let noise = NoiseModel::new(vec![coord])?;
    let table = deconv_kernel(spec, &noise, 0, h, &nodes)?;
    let kt = UniformTable::new(nodes[0], step, table.values);
    let density = |y: f64| {
        noise
            .coord(0)
            .ok()
            .and_then(|c| c.density(y))
            .unwrap_or(0.0)
    };
    let mut worst: f64 = 0.0;
    for i in 0..=80 {
        let x = -reach + reach * i as f64 / 40.0;
        let f = |y: f64| density(y) * kt.cubic((x - y) / h, f64::NAN) / h;
        // split at the origin, where the Laplace density has a kink
        let conv = quadrature::integrate(f, -tail, 0.0, 1e-12, 1e-12).value
            + quadrature::integrate(f, 0.0, tail, 1e-12, 1e-12).value;
        worst = worst.max((conv - spec.density(x / h) / h).abs());
    }
    Ok(worst)
}
