//! Multivariate deconvolution density estimator.

use log::warn;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{Axis, GridDensity};
use crate::interp::UniformTable;
use crate::kernel::{deconv_kernel_uniform, kernel_order, KernelSpec};
use crate::measures::{apply_linear, LinearMap, NoiseModel, SampleBatch};

/// Kernel table resolution in units of `x/h`; keeps linear interpolation
/// error near 1e-6 relative for kernels band-limited to `[-1, 1]`.
const TABLE_STEP: f64 = 1.0 / 512.0;
/// Samples per worker partial grid.
const CHUNK: usize = 2048;
/// Grid margin beyond the data range, in effective bandwidths `m h`.
pub const GRID_MARGIN: f64 = 5.0;

/// `GRID_MARGIN m h`, the kernel's main lobe being about `m h` wide; leaves
/// about 0.1% of the kernel mass outside.
pub fn grid_margin(p: f64, h: f64) -> Result<f64> {
    Ok(GRID_MARGIN * kernel_order(p)? as f64 * h)
}

/// `h = (4d / (gamma2 log n))^{1/beta}`, used on every coordinate.
pub fn bandwidth_rule(d: usize, beta: f64, gamma2: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(invalid(format!("bandwidth rule needs n >= 3, got {n}")));
    }
    bandwidth_rule_real(d, beta, gamma2, n as f64)
}

/// [`bandwidth_rule`] for a real-valued sample size.
pub fn bandwidth_rule_real(d: usize, beta: f64, gamma2: f64, n: f64) -> Result<f64> {
    if !(beta > 0.0) || !(gamma2 > 0.0) || d == 0 {
        return Err(invalid(format!(
            "bandwidth rule needs beta > 0, gamma2 > 0, d >= 1 (got {beta}, {gamma2}, {d})"
        )));
    }
    let log_n = n.ln();
    if !(log_n > 0.0) {
        return Err(invalid(format!("log n = {log_n} must be positive")));
    }
    Ok((4.0 * d as f64 / (gamma2 * log_n)).powf(1.0 / beta))
}

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub p: f64,
    pub bandwidths: Vec<f64>,
    pub grid: Vec<Axis>,
    pub decorrelation: Option<LinearMap>,
}

impl EstimatorConfig {
    pub fn new(
        p: f64,
        bandwidths: Vec<f64>,
        grid: Vec<Axis>,
        decorrelation: Option<LinearMap>,
    ) -> Result<Self> {
        if bandwidths.len() != grid.len() || bandwidths.is_empty() {
            return Err(invalid(format!(
                "{} bandwidths for a {}-dimensional grid",
                bandwidths.len(),
                grid.len()
            )));
        }
        if let Some(h) = bandwidths.iter().find(|h| !(**h > 0.0 && **h <= 1.0)) {
            return Err(invalid(format!("bandwidth {h} must lie in (0, 1]")));
        }
        if let Some(a) = &decorrelation {
            if a.dim() != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    got: a.dim(),
                });
            }
        }
        KernelSpec::new(p)?;
        Ok(Self {
            p,
            bandwidths,
            grid,
            decorrelation,
        })
    }

    /// Default grid: data range extended by [`grid_margin`] per side, 256
    /// nodes per axis for `d <= 2` and 64 beyond.
    pub fn auto(
        samples: &SampleBatch,
        p: f64,
        bandwidths: Vec<f64>,
        nodes: Option<usize>,
    ) -> Result<Self> {
        let d = samples.dim();
        if bandwidths.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bandwidths.len(),
            });
        }
        let count = nodes.unwrap_or(if d <= 2 { 256 } else { 64 });
        let grid = samples
            .bounds()
            .into_iter()
            .zip(&bandwidths)
            .map(|((lo, hi), &h)| {
                let m = grid_margin(p, h)?;
                Axis::new(lo - m, hi + m, count)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(p, bandwidths, grid, None)
    }

    /// [`EstimatorConfig::auto`] for estimation through `map`; the grid also
    /// covers the preimage of the decorrelated frame's data box.
    pub fn auto_decorrelated(
        samples: &SampleBatch,
        p: f64,
        bandwidths: Vec<f64>,
        nodes: Option<usize>,
        map: LinearMap,
    ) -> Result<Self> {
        let base = Self::auto(samples, p, bandwidths.clone(), nodes)?;
        if map.dim() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                got: map.dim(),
            });
        }
        let d = base.dim();
        let zb: Vec<(f64, f64)> = apply_linear(&map, samples)?
            .bounds()
            .into_iter()
            .zip(&bandwidths)
            .map(|((lo, hi), &h)| Ok((lo - grid_margin(p, h)?, hi + grid_margin(p, h)?)))
            .collect::<Result<_>>()?;
        let inv = map.inverse();
        let mut lo: Vec<f64> = base.grid.iter().map(|a| a.min).collect();
        let mut hi: Vec<f64> = base.grid.iter().map(|a| a.max).collect();
        let (mut corner, mut image) = (vec![0.0; d], vec![0.0; d]);
        for mask in 0..(1usize << d) {
            for k in 0..d {
                corner[k] = if (mask >> k) & 1 == 1 {
                    zb[k].1
                } else {
                    zb[k].0
                };
            }
            inv.apply_point(&corner, &mut image);
            for k in 0..d {
                lo[k] = lo[k].min(image[k]);
                hi[k] = hi[k].max(image[k]);
            }
        }
        let grid = (0..d)
            .map(|k| Axis::new(lo[k], hi[k], base.grid[k].count))
            .collect::<Result<Vec<_>>>()?;
        Self::new(p, bandwidths, grid, Some(map))
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    fn check_coverage(&self, samples: &SampleBatch) -> Result<()> {
        for (j, ((lo, hi), axis)) in samples.bounds().into_iter().zip(&self.grid).enumerate() {
            let margin = grid_margin(self.p, self.bandwidths[j])?;
            let slack = 1e-9 * (axis.max - axis.min);
            if axis.min > lo - margin + slack || axis.max < hi + margin - slack {
                return Err(Error::GridCoverage(format!(
                    "axis {j} spans [{}, {}] but samples plus margin need [{}, {}]",
                    axis.min,
                    axis.max,
                    lo - margin,
                    hi + margin
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimateWarning {
    /// Raw estimate integrates far from one.
    MassDeviation { integral: f64 },
    /// More than 1% of the estimate's absolute mass sits in the outer cells.
    GridTooSmall { boundary_fraction: f64 },
}

#[derive(Debug, Clone)]
pub struct Estimate {
    pub density: GridDensity,
    pub warnings: Vec<EstimateWarning>,
}

/// Per-coordinate deconvolution kernels tabulated once for a fixed
/// bandwidth vector, reusable across batches.
#[derive(Debug, Clone)]
pub struct KernelBank {
    pub spec: KernelSpec,
    pub bandwidths: Vec<f64>,
    tables: Vec<UniformTable>,
}

impl KernelBank {
    /// Tables cover `|x - y| / h_j <= reach_j / h_j`.
    pub fn new(
        spec: KernelSpec,
        noise: &NoiseModel,
        bandwidths: &[f64],
        reach: &[f64],
    ) -> Result<Self> {
        if noise.dim() != bandwidths.len() || reach.len() != bandwidths.len() {
            return Err(Error::DimensionMismatch {
                expected: bandwidths.len(),
                got: noise.dim(),
            });
        }
        let tables = bandwidths
            .iter()
            .zip(reach)
            .enumerate()
            .map(|(j, (&h, &r))| {
                let half = (r / h / TABLE_STEP).ceil() as usize + 2;
                deconv_kernel_uniform(
                    &spec,
                    noise.coord(j)?,
                    h,
                    -(half as f64) * TABLE_STEP,
                    TABLE_STEP,
                    2 * half + 1,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec,
            bandwidths: bandwidths.to_vec(),
            tables,
        })
    }

    /// Bank wide enough for any sample on `grid` against any point of `grid`.
    pub fn for_grid(
        spec: KernelSpec,
        noise: &NoiseModel,
        bandwidths: &[f64],
        grid: &[Axis],
    ) -> Result<Self> {
        let reach: Vec<f64> = grid.iter().map(|a| a.max - a.min).collect();
        Self::new(spec, noise, bandwidths, &reach)
    }

    pub fn covers(&self, grid: &[Axis]) -> bool {
        grid.iter()
            .zip(&self.tables)
            .zip(&self.bandwidths)
            .all(|((a, t), h)| (a.max - a.min) / h <= t.end() + 1e-9)
    }

    /// `(1/h) k~((x - y)/h)` at every node of `axis`.
    fn row(&self, j: usize, axis: &Axis, y: f64, out: &mut [f64]) {
        let h = self.bandwidths[j];
        let table = &self.tables[j];
        let inv_h = 1.0 / h;
        let step = axis.spacing() * inv_h;
        let start = (axis.min - y) * inv_h;
        for (g, o) in out.iter_mut().enumerate() {
            *o = inv_h * table.linear(start + step * g as f64, 0.0);
        }
    }
}

/// `f_n(x) = (1/n) sum_i prod_j (1/h_j) k~_{j,h_j}((x_j - Y_ij)/h_j)` on the grid.
pub fn estimate_raw(
    samples: &SampleBatch,
    noise: &NoiseModel,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    let spec = KernelSpec::new(cfg.p)?;
    let bank = KernelBank::for_grid(spec, noise, &cfg.bandwidths, &cfg.grid)?;
    estimate_raw_with(&bank, samples, cfg)
}

/// [`estimate_raw`] with pre-tabulated kernels.
pub fn estimate_raw_with(
    bank: &KernelBank,
    samples: &SampleBatch,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    let d = cfg.dim();
    if samples.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: samples.dim(),
        });
    }
    if bank.bandwidths != cfg.bandwidths || !bank.covers(&cfg.grid) {
        return Err(invalid(
            "kernel bank does not match the estimator configuration",
        ));
    }
    cfg.check_coverage(samples)?;
    let counts: Vec<usize> = cfg.grid.iter().map(|a| a.count).collect();
    let size: usize = counts.iter().product();

    let partials: Vec<Vec<f64>> = samples
        .as_slice()
        .par_chunks(CHUNK * d)
        .map(|chunk| {
            let mut acc = vec![0.0; size];
            let mut rows: Vec<Vec<f64>> = counts.iter().map(|&c| vec![0.0; c]).collect();
            let mut scratch = vec![0.0; size];
            for y in chunk.chunks_exact(d) {
                for j in 0..d {
                    bank.row(j, &cfg.grid[j], y[j], &mut rows[j]);
                }
                accumulate_outer(&rows, &mut acc, &mut scratch);
            }
            acc
        })
        .collect();
    // ordered merge keeps the sum independent of scheduling
    let mut values = vec![0.0; size];
    for part in &partials {
        for (v, p) in values.iter_mut().zip(part) {
            *v += p;
        }
    }
    let inv_n = 1.0 / samples.len() as f64;
    for v in values.iter_mut() {
        *v *= inv_n;
    }
    let density = GridDensity::new(cfg.grid.clone(), values)?;
    let warnings = diagnose(&density);
    for w in &warnings {
        warn!("raw estimate: {w:?}");
    }
    Ok(Estimate { density, warnings })
}

/// `acc += rows[0] (x) rows[1] (x) ...`
fn accumulate_outer(rows: &[Vec<f64>], acc: &mut [f64], scratch: &mut [f64]) {
    match rows.len() {
        1 => {
            for (a, r) in acc.iter_mut().zip(&rows[0]) {
                *a += r;
            }
        }
        2 => {
            let n2 = rows[1].len();
            for (i, &r0) in rows[0].iter().enumerate() {
                if r0 == 0.0 {
                    continue;
                }
                let dst = &mut acc[i * n2..(i + 1) * n2];
                for (a, &r1) in dst.iter_mut().zip(&rows[1]) {
                    *a += r0 * r1;
                }
            }
        }
        _ => {
            // build the product in scratch one axis at a time
            let mut len = rows[0].len();
            scratch[..len].copy_from_slice(&rows[0]);
            for row in &rows[1..] {
                let m = row.len();
                for i in (0..len).rev() {
                    let v = scratch[i];
                    for (k, r) in row.iter().enumerate() {
                        scratch[i * m + k] = v * r;
                    }
                }
                len *= m;
            }
            for (a, s) in acc.iter_mut().zip(&scratch[..len]) {
                *a += s;
            }
        }
    }
}

fn diagnose(density: &GridDensity) -> Vec<EstimateWarning> {
    let mut out = Vec::new();
    let integral = density.integral();
    if (integral - 1.0).abs() > 0.1 {
        out.push(EstimateWarning::MassDeviation { integral });
    }
    let w = density.weights();
    let mut idx = vec![0; density.dim()];
    let (mut total, mut edge) = (0.0, 0.0);
    for (flat, (&v, &wt)) in density.values().iter().zip(&w).enumerate() {
        let m = (v * wt).abs();
        total += m;
        density.unravel(flat, &mut idx);
        if idx
            .iter()
            .zip(density.axes())
            .any(|(&i, a)| i < 2 || i + 2 >= a.count)
        {
            edge += m;
        }
    }
    if total > 0.0 && edge / total > 0.01 {
        out.push(EstimateWarning::GridTooSmall {
            boundary_fraction: edge / total,
        });
    }
    out
}

/// `g_n = alpha_n max(f_n, 0)` with `alpha_n = 1 / int max(f_n, 0)`.
pub fn positive_normalize(raw: &GridDensity) -> Result<GridDensity> {
    let mut out = raw.clone();
    for v in out.values_mut() {
        *v = v.max(0.0);
    }
    let mass = out.integral();
    if !(mass > 0.0) {
        return Err(Error::DegenerateEstimate);
    }
    let alpha = 1.0 / mass;
    for v in out.values_mut() {
        *v *= alpha;
    }
    out.set_normalized(true);
    Ok(out)
}

/// Full pipeline: decorrelate with `A`, estimate and normalize in the
/// decorrelated frame, then map back through `g(x) = |det A| g_A(Ax)`.
///
/// `noise` is the law of `A eps`, whose coordinates the caller asserts are
/// independent.
pub fn estimate_measure(
    samples: &SampleBatch,
    noise: &NoiseModel,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    let d = cfg.dim();
    let map = match &cfg.decorrelation {
        Some(a) if !a.is_identity(0.0) => a.clone(),
        _ => {
            let raw = estimate_raw(samples, noise, cfg)?;
            return Ok(Estimate {
                density: positive_normalize(&raw.density)?,
                warnings: raw.warnings,
            });
        }
    };
    if samples.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: samples.dim(),
        });
    }
    let z = apply_linear(&map, samples)?;
    let margins = cfg
        .bandwidths
        .iter()
        .map(|&h| grid_margin(cfg.p, h))
        .collect::<Result<Vec<_>>>()?;
    let frame = decorrelated_grid(&map, &cfg.grid, &z, &margins)?;
    let inner = EstimatorConfig::new(cfg.p, cfg.bandwidths.clone(), frame, None)?;
    let raw = estimate_raw(&z, noise, &inner)?;
    let g_a = positive_normalize(&raw.density)?;

    let det = map.det_abs();
    let mut y = vec![0.0; d];
    let back = GridDensity::from_fn(cfg.grid.clone(), |x| {
        map.apply_point(x, &mut y);
        det * g_a.interpolate(&y)
    })?;
    let mass = back.integral();
    if (mass - 1.0).abs() > 0.01 {
        return Err(Error::GridCoverage(format!(
            "back-mapped estimate has mass {mass}"
        )));
    }
    let mut density = back;
    for v in density.values_mut() {
        *v /= mass;
    }
    density.set_normalized(true);
    Ok(Estimate {
        density,
        warnings: raw.warnings,
    })
}

/// Grid for the decorrelated frame: the bounding box of `A` applied to the
/// target grid, widened to cover the transformed samples.
fn decorrelated_grid(
    map: &LinearMap,
    grid: &[Axis],
    z: &SampleBatch,
    margins: &[f64],
) -> Result<Vec<Axis>> {
    let d = grid.len();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    let mut corner = vec![0.0; d];
    let mut image = vec![0.0; d];
    for mask in 0..(1usize << d) {
        for k in 0..d {
            corner[k] = if (mask >> k) & 1 == 1 {
                grid[k].max
            } else {
                grid[k].min
            };
        }
        map.apply_point(&corner, &mut image);
        for k in 0..d {
            lo[k] = lo[k].min(image[k]);
            hi[k] = hi[k].max(image[k]);
        }
    }
    let min_spacing = grid.iter().map(Axis::spacing).fold(f64::INFINITY, f64::min);
    let max_count = grid.iter().map(|a| a.count).max().unwrap_or(2);
    z.bounds()
        .into_iter()
        .enumerate()
        .map(|(k, (zl, zh))| {
            let a = lo[k].min(zl - margins[k]);
            let b = hi[k].max(zh + margins[k]);
            let count = (((b - a) / min_spacing).ceil() as usize + 1).clamp(2, 2 * max_count);
            Axis::new(a, b, count)
        })
        .collect()
}
