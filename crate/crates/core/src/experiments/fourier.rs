use std::path::Path;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::Deserialize;

use super::config::NoiseSpec;
use super::rate::cell_seed;
use super::report::{fmt_f64, write_csv_file};
use crate::error::{invalid, Error, Result};
use crate::estimator::{bandwidth_rule, estimate_raw_with, EstimatorConfig, KernelBank};
use crate::grid::Axis;
use crate::kernel::KernelSpec;
use crate::measures::{sample_noise_with, NoiseModel, SampleBatch};

/// Monte Carlo check that the raw estimate's Fourier transform averages to
/// `k*(h t) mu*(t)` for a finitely supported 1-D latent law.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierStudyConfig {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub noise: NoiseSpec,
    pub p: f64,
    pub n: usize,
    pub replicates: usize,
    pub t_list: Vec<f64>,
    pub seed: u64,
    /// Defaults to the logarithmic rule for the noise.
    #[serde(default)]
    pub bandwidth: Option<f64>,
    /// Half-width of the estimation grid around the origin.
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
}

fn default_half_width() -> f64 {
    40.0
}

fn default_nodes() -> usize {
    1601
}

impl FourierStudyConfig {
    /// Two atoms at -1 and 2 with weights 0.3 and 0.7 under N(0, 1) noise.
    pub fn two_point_default() -> Self {
        Self {
            points: vec![-1.0, 2.0],
            weights: vec![0.3, 0.7],
            noise: NoiseSpec::Gaussian { sigma: 1.0 },
            p: 1.0,
            n: 10_000,
            replicates: 50,
            t_list: vec![0.5, 1.0, 2.0],
            seed: 2024,
            bandwidth: None,
            half_width: default_half_width(),
            nodes: default_nodes(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    fn validate(&self) -> Result<()> {
        if self.points.is_empty() || self.points.len() != self.weights.len() {
            return Err(invalid(
                "points and weights must be nonempty and of equal length",
            ));
        }
        if self.replicates < 2 || self.n == 0 || self.t_list.is_empty() {
            return Err(invalid(
                "need n >= 1, at least two replicates and one frequency",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierRow {
    pub t: f64,
    pub mean: Complex64,
    /// Standard errors of the real and imaginary means.
    pub stderr: (f64, f64),
    pub target: Complex64,
}

impl FourierRow {
    /// Largest deviation from the target in standard errors.
    pub fn z_score(&self) -> f64 {
        let z = |d: f64, s: f64| {
            if s > 0.0 {
                d.abs() / s
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        let d = self.mean - self.target;
        z(d.re, self.stderr.0).max(z(d.im, self.stderr.1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierStudy {
    pub bandwidth: f64,
    pub rows: Vec<FourierRow>,
}

pub fn run_fourier_study(cfg: &FourierStudyConfig) -> Result<FourierStudy> {
    cfg.validate()?;
    let noise = NoiseModel::new(vec![cfg.noise.build()?])?;
    let h = match cfg.bandwidth {
        Some(h) => h,
        None => {
            let (beta, gamma2) = noise
                .rate_parameters()
                .ok_or_else(|| Error::Config("noise is not supersmooth; set `bandwidth`".into()))?;
            bandwidth_rule(1, beta, gamma2, cfg.n)?.min(1.0)
        }
    };
    let axis = Axis::new(-cfg.half_width, cfg.half_width, cfg.nodes)?;
    let pick = WeightedIndex::new(&cfg.weights).map_err(|e| invalid(e.to_string()))?;
    let total: f64 = cfg.weights.iter().sum();
    let weights = axis.trapezoid_weights();
    let nodes = axis.nodes();
    let est_cfg = EstimatorConfig::new(cfg.p, vec![h], vec![axis], None)?;
    let bank = KernelBank::for_grid(KernelSpec::new(cfg.p)?, &noise, &[h], &est_cfg.grid)?;

    let transforms: Vec<Vec<Complex64>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(cfg.seed, 0, rep));
            let x: Vec<f64> = (0..cfg.n)
                .map(|_| cfg.points[pick.sample(&mut rng)])
                .collect();
            let y = SampleBatch::new(x, 1)?.add(&sample_noise_with(&noise, cfg.n, &mut rng)?)?;
            let est = estimate_raw_with(&bank, &y, &est_cfg)?;
            let f = est.density.values();
            Ok(cfg
                .t_list
                .iter()
                .map(|&t| {
                    (0..nodes.len())
                        .map(|i| weights[i] * f[i] * Complex64::from_polar(1.0, t * nodes[i]))
                        .sum()
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let spec = KernelSpec::new(cfg.p)?;
    let r = cfg.replicates as f64;
    let rows = cfg
        .t_list
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mean = transforms.iter().map(|v| v[k]).sum::<Complex64>() / r;
            let var = |f: fn(Complex64) -> f64| {
                transforms
                    .iter()
                    .map(|v| (f(v[k]) - f(mean)).powi(2))
                    .sum::<f64>()
                    / (r - 1.0)
                    / r
            };
            let mu: Complex64 = cfg
                .points
                .iter()
                .zip(&cfg.weights)
                .map(|(&a, &w)| w / total * Complex64::from_polar(1.0, t * a))
                .sum();
            FourierRow {
                t,
                mean,
                stderr: (var(|z| z.re).sqrt(), var(|z| z.im).sqrt()),
                target: spec.ft(h * t) * mu,
            }
        })
        .collect();
    Ok(FourierStudy { bandwidth: h, rows })
}

/// Writes `t,mean_re,mean_im,stderr_re,stderr_im,target_re,target_im`.
pub fn emit_fourier_report(study: &FourierStudy, path: &Path) -> Result<()> {
    write_csv_file(
        path,
        &[
            "t",
            "mean_re",
            "mean_im",
            "stderr_re",
            "stderr_im",
            "target_re",
            "target_im",
        ],
        study.rows.iter().map(|r| {
            [
                r.t,
                r.mean.re,
                r.mean.im,
                r.stderr.0,
                r.stderr.1,
                r.target.re,
                r.target.im,
            ]
            .map(fmt_f64)
            .to_vec()
        }),
    )
}
