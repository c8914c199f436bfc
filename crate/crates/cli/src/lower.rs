use std::path::Path;

use anyhow::Result;
use serde::Deserialize;
use wassdeconv_core::experiments::{
    fmt_f64, run_lowerbound_study, write_csv_file, LowerBoundStudyConfig, NoiseSpec,
};
use wassdeconv_core::lowerbound::{
    chi2_decay_study, tail_condition_check, verify_stable_convolution, BasePowerDensity,
    DecayStudyConfig,
};
use wassdeconv_core::CoordinateNoise;

use crate::io::read_toml;
use crate::Study;

pub fn run(study: Study, config: Option<&Path>, out: &Path) -> Result<bool> {
    fn load<T: Default + serde::de::DeserializeOwned>(config: Option<&Path>) -> Result<T> {
        config.map_or_else(|| Ok(T::default()), read_toml)
    }
    match study {
        Study::Chi2 => chi2(&load(config)?, out),
        Study::Tails => tails(&load(config)?, out),
        Study::Stable => stable(&load(config)?, out),
        Study::Proxy => {
            let cfg = match config {
                Some(path) => LowerBoundStudyConfig::from_toml(&std::fs::read_to_string(path)?)?,
                None => LowerBoundStudyConfig::gaussian_default(),
            };
            proxy(&cfg, out)
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Chi2Config {
    pub noise: NoiseSpec,
    pub r: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub gamma: f64,
    pub beta: f64,
    pub bn_list: Vec<usize>,
}

impl Default for Chi2Config {
    fn default() -> Self {
        Self {
            noise: NoiseSpec::Gaussian { sigma: 1.0 },
            r: 2.87,
            kappa1: 0.6,
            kappa2: 3.4,
            gamma: 2.0,
            beta: 2.0,
            bn_list: (1..=6).collect(),
        }
    }
}

fn chi2(cfg: &Chi2Config, out: &Path) -> Result<bool> {
    let study = chi2_decay_study(
        &cfg.noise.build()?,
        &DecayStudyConfig::new(
            cfg.r,
            cfg.kappa1,
            cfg.kappa2,
            cfg.gamma,
            cfg.beta,
            cfg.bn_list.clone(),
        ),
    )?;
    write_csv_file(
        out,
        &["b_n", "chi2", "log_chi2", "predicted", "grid_chi2"],
        study.rows.iter().map(|r| {
            vec![
                r.b_n.to_string(),
                fmt_f64(r.chi2),
                fmt_f64(r.log_chi2),
                fmt_f64(r.predicted),
                r.grid_chi2.map(fmt_f64).unwrap_or_default(),
            ]
        }),
    )?;
    println!(
        "slope {:.4} against -eta = {:.4}; {}",
        study.slope,
        -study.eta,
        verdict(study.passes)
    );
    Ok(study.passes)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TailDensity {
    Gaussian {
        sigma: f64,
    },
    /// `C_r (1 + t^2)^{-r}`.
    PowerLaw {
        r: f64,
    },
}

impl TailDensity {
    fn label(&self) -> String {
        match self {
            TailDensity::Gaussian { sigma } => format!("gaussian:{sigma}"),
            TailDensity::PowerLaw { r } => format!("power-law:{r}"),
        }
    }

    fn evaluator(&self) -> Result<Box<dyn Fn(f64) -> f64>> {
        Ok(match *self {
            TailDensity::Gaussian { sigma } => {
                let g = CoordinateNoise::gaussian(sigma)?;
                Box::new(move |x| g.density(x).unwrap_or(0.0))
            }
            TailDensity::PowerLaw { r } => {
                let f = BasePowerDensity::new(r)?;
                Box::new(move |x| f.eval(x))
            }
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailsConfig {
    pub kappa1: f64,
    pub kappa2: f64,
    pub t_list: Vec<f64>,
    pub densities: Vec<TailDensity>,
}

impl Default for TailsConfig {
    fn default() -> Self {
        Self {
            kappa1: 0.6,
            kappa2: 3.4,
            t_list: (0..12).map(|i| 10.0 * 1.6f64.powi(i)).collect(),
            densities: vec![
                TailDensity::Gaussian { sigma: 1.0 },
                TailDensity::PowerLaw { r: 2.0 },
                TailDensity::PowerLaw { r: 3.0 },
            ],
        }
    }
}

/// Tables at the configured `kappa2` and at `kappa2 + 1`.
fn tails(cfg: &TailsConfig, out: &Path) -> Result<bool> {
    let mut rows = Vec::new();
    for d in &cfg.densities {
        let f = d.evaluator()?;
        for kappa2 in [cfg.kappa2, cfg.kappa2 + 1.0] {
            let table = tail_condition_check(&f, cfg.kappa1, kappa2, &cfg.t_list)?;
            println!(
                "{:<16} kappa2 = {kappa2:<5} {}",
                d.label(),
                if table.bounded {
                    "bounded"
                } else {
                    "unbounded"
                }
            );
            for r in &table.rows {
                rows.push(vec![
                    d.label(),
                    fmt_f64(kappa2),
                    fmt_f64(r.t),
                    fmt_f64(r.probability),
                    fmt_f64(r.ratio),
                    table.bounded.to_string(),
                ]);
            }
        }
    }
    write_csv_file(
        out,
        &["density", "kappa2", "t", "probability", "ratio", "bounded"],
        rows,
    )?;
    Ok(true)
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StableConfig {
    pub alphas: Vec<f64>,
    pub ks: Vec<u32>,
    pub half_width: f64,
}

impl Default for StableConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.5, 1.0, 1.5],
            ks: vec![2, 3],
            half_width: 20.0,
        }
    }
}

fn stable(cfg: &StableConfig, out: &Path) -> Result<bool> {
    let mut rows = Vec::new();
    let mut ok = true;
    for &alpha in &cfg.alphas {
        for &k in &cfg.ks {
            let s = verify_stable_convolution(alpha, k, cfg.half_width)?;
            ok &= s.pass;
            println!(
                "alpha = {alpha:<4} k = {k}  a = {:.4}  b = {:.4}  {}",
                s.a_fit,
                s.b_fit,
                verdict(s.pass)
            );
            rows.push(vec![
                fmt_f64(alpha),
                k.to_string(),
                fmt_f64(s.a_fit),
                fmt_f64(s.b_fit),
                s.pass.to_string(),
                fmt_f64(s.reliable_radius),
                s.truncated.to_string(),
            ]);
        }
    }
    write_csv_file(
        out,
        &[
            "alpha",
            "k",
            "a_fit",
            "b_fit",
            "pass",
            "reliable_radius",
            "truncated",
        ],
        rows,
    )?;
    Ok(ok)
}

fn proxy(cfg: &LowerBoundStudyConfig, out: &Path) -> Result<bool> {
    let study = run_lowerbound_study(cfg)?;
    write_csv_file(
        out,
        &[
            "n",
            "b_n",
            "log_chi2",
            "log_n_chi2",
            "le_cam",
            "proxy_raw",
            "proxy",
            "reference",
            "ratio",
        ],
        study.rows.iter().map(|r| {
            let mut row = vec![r.n.to_string(), r.b_n.to_string()];
            row.extend(
                [
                    r.log_chi2,
                    r.log_n_chi2,
                    r.le_cam,
                    r.proxy_raw,
                    r.proxy,
                    r.reference,
                    r.ratio,
                ]
                .map(fmt_f64),
            );
            row
        }),
    )?;
    let in_band = study
        .rows
        .iter()
        .all(|r| (1.0 / 3.0..=3.0).contains(&r.ratio));
    for r in &study.rows {
        println!("n = {:<9} b_n = {:<3} ratio = {:.4}", r.n, r.b_n, r.ratio);
    }
    Ok(in_band)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}
