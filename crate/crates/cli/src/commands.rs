use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use wassdeconv_core::estimator::{bandwidth_rule, estimate_measure, estimate_raw, EstimatorConfig};
use wassdeconv_core::experiments::{
    emit_fourier_report, emit_report, fmt_f64, run_fourier_study, run_rate_study, write_csv_file,
    FourierStudyConfig, NoiseSpec, RateStudyConfig,
};
use wassdeconv_core::kernel::{self, KernelSpec};
use wassdeconv_core::kernel_suite::kernel_suite;
use wassdeconv_core::{wp_discrete, DiscreteMeasure, LinearMap, NoiseModel, SampleBatch};

use crate::io::{parse_noise, read_rows, read_toml};

pub fn rates(config: &Path, out_dir: &Path) -> Result<bool> {
    let cfg = RateStudyConfig::load(config)?;
    let result = run_rate_study(&cfg)?;
    let files = emit_report(&result, out_dir)?;
    for s in &result.summary {
        println!(
            "n = {:>8}  mean W_p^p = {:.6}  stderr = {:.2e}  h = {:.4}",
            s.n, s.mean, s.stderr, s.bandwidth
        );
    }
    match result.fitted_exponent {
        Some(e) => println!("fitted exponent in log log n: {e:.4}"),
        None => println!("fitted exponent: needs two sample sizes"),
    }
    if !result.failures.is_empty() {
        println!("{} cell(s) failed; see the log", result.failures.len());
    }
    println!("wrote {}", files.rows.parent().unwrap_or(out_dir).display());
    Ok(true)
}

pub fn fourier(config: Option<&Path>, out: &Path) -> Result<bool> {
    let cfg = match config {
        Some(path) => read_toml::<FourierStudyConfig>(path)?,
        None => FourierStudyConfig::two_point_default(),
    };
    let study = run_fourier_study(&cfg)?;
    emit_fourier_report(&study, out)?;
    let mut ok = true;
    for r in &study.rows {
        let z = r.z_score();
        ok &= z <= 3.0;
        println!("t = {:<5} |z| = {z:.3}", r.t);
    }
    Ok(ok)
}

/// Estimator settings read from a TOML file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimateConfig {
    p: f64,
    /// One noise entry per coordinate, or a single entry used for all.
    noise: Vec<NoiseSpec>,
    /// Common bandwidth; defaults to the logarithmic rule.
    #[serde(default)]
    bandwidth: Option<f64>,
    #[serde(default)]
    nodes: Option<usize>,
    /// Matrix making the noise coordinates independent.
    #[serde(default)]
    decorrelation: Option<Vec<Vec<f64>>>,
    /// Skip the positive-part normalization.
    #[serde(default)]
    raw: bool,
}

pub fn estimate(config: &Path, samples: &Path, out: &Path) -> Result<bool> {
    let cfg: EstimateConfig = read_toml(config)?;
    let rows = read_rows(samples)?;
    let d = rows[0].len();
    let batch = SampleBatch::from_rows(&rows)?;
    let coords = cfg
        .noise
        .iter()
        .map(NoiseSpec::build)
        .collect::<Result<Vec<_>, _>>()?;
    let noise = match coords.len() {
        1 => NoiseModel::iid(coords[0].clone(), d)?,
        k if k == d => NoiseModel::new(coords)?,
        k => bail!("{k} noise entries for {d}-dimensional samples"),
    };
    let h = match cfg.bandwidth {
        Some(h) => h,
        None => {
            let (beta, gamma2) = noise
                .rate_parameters()
                .context("noise is not supersmooth; set `bandwidth` in the config")?;
            bandwidth_rule(d, beta, gamma2, batch.len())?.min(1.0)
        }
    };
    let est_cfg = match &cfg.decorrelation {
        Some(m) => EstimatorConfig::auto_decorrelated(
            &batch,
            cfg.p,
            vec![h; d],
            cfg.nodes,
            LinearMap::from_rows(m)?,
        )?,
        None => EstimatorConfig::auto(&batch, cfg.p, vec![h; d], cfg.nodes)?,
    };
    let est = if cfg.raw {
        estimate_raw(&batch, &noise, &est_cfg)?
    } else {
        estimate_measure(&batch, &noise, &est_cfg)?
    };
    for w in &est.warnings {
        eprintln!("warning: {w:?}");
    }
    let g = &est.density;
    let mut header: Vec<String> = (1..=d).map(|j| format!("x_{j}")).collect();
    header.push("density".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut point = vec![0.0; d];
    write_csv_file(
        out,
        &header,
        (0..g.len()).map(|i| {
            g.point(i, &mut point);
            let mut row: Vec<String> = point.iter().map(|&x| fmt_f64(x)).collect();
            row.push(fmt_f64(g.values()[i]));
            row
        }),
    )?;
    println!(
        "bandwidth {h}; {} grid nodes written to {}",
        g.len(),
        out.display()
    );
    Ok(true)
}

fn read_measure(path: &Path, weighted: bool) -> Result<DiscreteMeasure> {
    let rows = read_rows(path)?;
    let width = rows[0].len();
    if weighted {
        if width < 2 {
            bail!(
                "{}: weighted rows need coordinates and a weight",
                path.display()
            );
        }
        let support = rows.iter().flat_map(|r| r[..width - 1].to_vec()).collect();
        Ok(DiscreteMeasure::normalized(
            support,
            width - 1,
            rows.iter().map(|r| r[width - 1]).collect(),
        )?)
    } else {
        Ok(DiscreteMeasure::uniform(rows.concat(), width)?)
    }
}

pub fn wasserstein(a: &Path, b: &Path, p: f64, weighted: bool) -> Result<bool> {
    let (mu, nu) = (read_measure(a, weighted)?, read_measure(b, weighted)?);
    let plan = wp_discrete(&mu, &nu, p)?;
    println!("W_p = {}", fmt_f64(plan.distance()));
    println!("W_p^p = {}", fmt_f64(plan.cost_p));
    Ok(true)
}

pub fn kernelcheck(p: f64) -> Result<bool> {
    let report = kernel_suite(p)?;
    println!("p = {p}, m = {}, c_p = {}", report.spec.m, report.spec.c_p);
    for c in &report.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} {:<26} {:.3e} (tolerance {:.1e})",
            c.name, c.value, c.tolerance
        );
    }
    Ok(report.passed())
}

pub fn deconv_kernel(
    p: f64,
    noise: &str,
    h: f64,
    half_width: f64,
    count: usize,
    out: &Path,
) -> Result<bool> {
    if count < 2 || !(half_width > 0.0) {
        bail!("need count >= 2 and a positive half width");
    }
    let spec = KernelSpec::new(p)?;
    let model = NoiseModel::new(vec![parse_noise(noise)?.build()?])?;
    let step = 2.0 * half_width / (count - 1) as f64;
    let grid: Vec<f64> = (0..count).map(|i| -half_width + step * i as f64).collect();
    let table = kernel::deconv_kernel(&spec, &model, 0, h, &grid)?;
    write_csv_file(
        out,
        &["x", "value"],
        grid.iter()
            .zip(&table.values)
            .map(|(x, v)| vec![fmt_f64(*x), fmt_f64(*v)]),
    )?;
    println!("largest imaginary residue {:.2e}", table.imag_residue);
    Ok(true)
}
