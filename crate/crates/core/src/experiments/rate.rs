use std::time::Instant;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::RateStudyConfig;
use super::truth::Truth;
use crate::error::{Error, Result};
use crate::estimator::{bandwidth_rule, estimate_measure, EstimatorConfig};
use crate::lowerbound::least_squares;
use crate::measures::{apply_linear, sample_noise_with};

/// Seed of cell `(n_index, replicate)`: `base + n_index * 10^6 + replicate`.
pub fn cell_seed(base: u64, n_index: usize, replicate: usize) -> u64 {
    base.wrapping_add(n_index as u64 * 1_000_000)
        .wrapping_add(replicate as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub n: usize,
    pub replicate: usize,
    /// `W_p^p` between the estimate and the truth; NaN for a failed cell.
    pub wpp: f64,
    /// Wall time, or 0 when timing is off.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub bandwidth: f64,
    /// Successful replicates behind the mean.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub n: usize,
    pub replicate: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateStudyResult {
    pub p: f64,
    pub rows: Vec<RateRow>,
    pub summary: Vec<SummaryRow>,
    /// Slope of `log mean W_p^p` against `log log n`.
    pub fitted_exponent: Option<f64>,
    pub failures: Vec<CellFailure>,
}

impl RateStudyResult {
    /// Per-n mean and standard error from `rows`, skipping failed cells.
    pub fn summarize(rows: &[RateRow], bandwidths: &[(usize, f64)]) -> Vec<SummaryRow> {
        bandwidths
            .iter()
            .map(|&(n, bandwidth)| {
                let vals: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.n == n && r.wpp.is_finite())
                    .map(|r| r.wpp)
                    .collect();
                let k = vals.len();
                let mean = if k == 0 {
                    f64::NAN
                } else {
                    vals.iter().sum::<f64>() / k as f64
                };
                let stderr = if k < 2 {
                    0.0
                } else {
                    (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                        / (k - 1) as f64
                        / k as f64)
                        .sqrt()
                };
                SummaryRow {
                    n,
                    mean,
                    stderr,
                    bandwidth,
                    count: k,
                }
            })
            .collect()
    }

    pub fn fit_exponent(summary: &[SummaryRow]) -> Option<f64> {
        let pts: Vec<(f64, f64)> = summary
            .iter()
            .filter(|s| s.mean > 0.0 && s.mean.is_finite())
            .map(|s| ((s.n as f64).ln().ln(), s.mean.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        Some(least_squares(&xs, &ys).0)
    }
}

/// Bandwidth for sample size `n`: the configured value, or the logarithmic
/// rule clamped to 1.
pub fn study_bandwidth(cfg: &RateStudyConfig, n: usize) -> Result<f64> {
    if let Some(h) = cfg.bandwidth {
        return Ok(h);
    }
    let (beta, gamma2) = cfg
        .noise_model()?
        .rate_parameters()
        .ok_or_else(|| Error::Config("noise is not supersmooth; set `bandwidth`".into()))?;
    let h = bandwidth_rule(cfg.dim(), beta, gamma2, n)?;
    if h > 1.0 {
        warn!("bandwidth rule gives {h} at n = {n}; clamped to 1");
    }
    Ok(h.min(1.0))
}

/// Simulates every `(n, replicate)` cell, estimates the latent law and
/// records `W_p^p` against the truth. Cells run in parallel; rows come back
/// ordered by `n` then replicate.
pub fn run_rate_study(cfg: &RateStudyConfig) -> Result<RateStudyResult> {
    cfg.validate()?;
    let truth = Truth::new(&cfg.truth)?;
    let noise = cfg.noise_model()?;
    let (mixing, decorrelation) = cfg.maps()?;
    let fixed = cfg.fixed_grid()?;
    let d = cfg.dim();
    let bandwidths: Vec<(usize, f64)> = cfg
        .n_list
        .iter()
        .map(|&n| Ok((n, study_bandwidth(cfg, n)?)))
        .collect::<Result<_>>()?;

    let cell = |idx: usize, rep: usize| -> Result<f64> {
        let (n, h) = bandwidths[idx];
        let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(cfg.seed, idx, rep));
        let x = truth.sample(n, &mut rng)?;
        let eta = sample_noise_with(&noise, n, &mut rng)?;
        let eps = match &mixing {
            Some(m) => apply_linear(m, &eta)?,
            None => eta,
        };
        let y = x.add(&eps)?;
        let est_cfg = match &fixed {
            Some(grid) => {
                EstimatorConfig::new(cfg.p, vec![h; d], grid.clone(), decorrelation.clone())?
            }
            None => match &decorrelation {
                Some(a) => EstimatorConfig::auto_decorrelated(
                    &y,
                    cfg.p,
                    vec![h; d],
                    Some(cfg.nodes()),
                    a.clone(),
                )?,
                None => EstimatorConfig::auto(&y, cfg.p, vec![h; d], Some(cfg.nodes()))?,
            },
        };
        let est = estimate_measure(&y, &noise, &est_cfg)?;
        truth.wpp(&est.density, cfg.p, cfg.max_atoms)
    };

    let jobs: Vec<(usize, usize)> = (0..cfg.n_list.len())
        .flat_map(|i| (0..cfg.replicates).map(move |r| (i, r)))
        .collect();
    let outcomes: Vec<(RateRow, Option<CellFailure>)> = jobs
        .par_iter()
        .map(|&(idx, rep)| {
            let start = cfg.record_timing.then(Instant::now);
            let n = cfg.n_list[idx];
            let result = cell(idx, rep);
            let seconds = start.map_or(0.0, |s| s.elapsed().as_secs_f64());
            match result {
                Ok(wpp) => (
                    RateRow {
                        n,
                        replicate: rep,
                        wpp,
                        seconds,
                    },
                    None,
                ),
                Err(e) => (
                    RateRow {
                        n,
                        replicate: rep,
                        wpp: f64::NAN,
                        seconds,
                    },
                    Some(CellFailure {
                        n,
                        replicate: rep,
                        message: e.to_string(),
                    }),
                ),
            }
        })
        .collect();
    let (rows, failures): (Vec<RateRow>, Vec<Option<CellFailure>>) = outcomes.into_iter().unzip();
    let failures: Vec<CellFailure> = failures.into_iter().flatten().collect();
    for f in &failures {
        warn!(
            "cell n = {}, replicate {} failed: {}",
            f.n, f.replicate, f.message
        );
    }
    if failures.len() * 10 > rows.len() {
        return Err(Error::Study(format!(
            "{} of {} cells failed; first: {}",
            failures.len(),
            rows.len(),
            failures[0].message
        )));
    }
    let summary = RateStudyResult::summarize(&rows, &bandwidths);
    let fitted_exponent = RateStudyResult::fit_exponent(&summary);
    Ok(RateStudyResult {
        p: cfg.p,
        rows,
        summary,
        fitted_exponent,
        failures,
    })
}
