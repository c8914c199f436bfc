use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{invalid, Error, Result};
use crate::grid::Axis;
use crate::measures::{CoordinateNoise, LinearMap, NoiseModel};

/// One noise coordinate as written in a config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseSpec {
    DiracZero,
    Gaussian { sigma: f64 },
    Laplace { b: f64 },
    Cauchy { s: f64 },
    Stable { alpha: f64 },
    PoweredStable { alpha: f64, k: u32 },
}

impl NoiseSpec {
    pub fn build(&self) -> Result<CoordinateNoise> {
        match *self {
            NoiseSpec::DiracZero => Ok(CoordinateNoise::dirac_zero()),
            NoiseSpec::Gaussian { sigma } => CoordinateNoise::gaussian(sigma),
            NoiseSpec::Laplace { b } => CoordinateNoise::laplace(b),
            NoiseSpec::Cauchy { s } => CoordinateNoise::cauchy(s),
            NoiseSpec::Stable { alpha } => CoordinateNoise::stable(alpha),
            NoiseSpec::PoweredStable { alpha, k } => CoordinateNoise::powered_stable(alpha, k),
        }
    }
}

/// Law of the latent variable `X`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TruthSpec {
    /// Isotropic components; `variances[i]` is the per-coordinate variance.
    GaussianMixture {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        variances: Vec<f64>,
    },
    Discrete {
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    /// Product of `C_r (1 + t^2)^{-r}` densities.
    PowerLaw {
        r: f64,
        #[serde(default = "one")]
        dim: usize,
    },
}

fn one() -> usize {
    1
}

impl TruthSpec {
    pub fn dim(&self) -> usize {
        match self {
            TruthSpec::GaussianMixture { means, .. } => means.first().map_or(0, Vec::len),
            TruthSpec::Discrete { points, .. } => points.first().map_or(0, Vec::len),
            TruthSpec::PowerLaw { dim, .. } => *dim,
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::Config("truth has dimension 0".into()));
        }
        let check_weights = |w: &[f64], k: usize| -> Result<()> {
            if w.len() != k || w.iter().any(|x| !(*x >= 0.0)) || !(w.iter().sum::<f64>() > 0.0) {
                return Err(Error::Config(format!(
                    "{} weights for {k} components, or a negative weight",
                    w.len()
                )));
            }
            Ok(())
        };
        match self {
            TruthSpec::GaussianMixture {
                weights,
                means,
                variances,
            } => {
                check_weights(weights, means.len())?;
                if variances.len() != means.len() || variances.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::Config(
                        "mixture needs one positive variance per component".into(),
                    ));
                }
                if means.iter().any(|m| m.len() != d) {
                    return Err(Error::Config("mixture means have mixed dimensions".into()));
                }
            }
            TruthSpec::Discrete { points, weights } => {
                check_weights(weights, points.len())?;
                if points.iter().any(|m| m.len() != d) {
                    return Err(Error::Config(
                        "discrete points have mixed dimensions".into(),
                    ));
                }
            }
            TruthSpec::PowerLaw { r, .. } => {
                if !(*r > 0.5) {
                    return Err(Error::Config(format!(
                        "power-law exponent {r} must exceed 1/2"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Estimation grid. Without `bounds` each replicate gets the automatic
/// grid around its own sample.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nodes: Option<usize>,
    pub bounds: Option<Vec<[f64; 2]>>,
}

fn default_atoms() -> usize {
    crate::wasserstein::DEFAULT_MAX_ATOMS
}

/// Monte Carlo rate study over sample sizes.
///
/// Observations are `Y = X + M eta` with `eta` drawn from `noise` and `M`
/// the optional `mixing` matrix. The estimator runs in the frame of
/// `decorrelation` (default `M^{-1}`), which must turn the noise back into
/// `eta`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateStudyConfig {
    pub truth: TruthSpec,
    /// One entry per coordinate, or a single entry used on every coordinate.
    pub noise: Vec<NoiseSpec>,
    #[serde(default)]
    pub mixing: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub decorrelation: Option<Vec<Vec<f64>>>,
    pub p: f64,
    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    /// Fixed bandwidth; otherwise the logarithmic rule from the noise.
    #[serde(default)]
    pub bandwidth: Option<f64>,
    /// Record wall time per cell. Off by default so reports are reproducible.
    #[serde(default)]
    pub record_timing: bool,
    /// Atom budget per measure for `W_p` in two or more dimensions.
    #[serde(default = "default_atoms")]
    pub max_atoms: usize,
}

impl RateStudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn dim(&self) -> usize {
        self.truth.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.truth.validate()?;
        if self.n_list.is_empty() || self.n_list.iter().any(|&n| n < 100) {
            return Err(Error::Config(
                "n_list must be nonempty with every n >= 100".into(),
            ));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_list must be strictly increasing".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        let d = self.dim();
        if self.noise.len() != 1 && self.noise.len() != d {
            return Err(Error::Config(format!(
                "{} noise coordinates for dimension {d}",
                self.noise.len()
            )));
        }
        if let Some(b) = &self.grid.bounds {
            if b.len() != d || b.iter().any(|[lo, hi]| !(lo < hi)) {
                return Err(Error::Config(
                    "grid bounds need one increasing pair per coordinate".into(),
                ));
            }
        }
        if self.grid.nodes.is_some_and(|n| n < 2) {
            return Err(Error::Config("grid needs at least 2 nodes per axis".into()));
        }
        if let Some(h) = self.bandwidth {
            if !(h > 0.0 && h <= 1.0) {
                return Err(Error::Config(format!("bandwidth {h} must lie in (0, 1]")));
            }
        }
        self.maps()?;
        self.noise_model()?;
        Ok(())
    }

    /// Law of `eta`, which is also the law of the decorrelated noise.
    pub fn noise_model(&self) -> Result<NoiseModel> {
        let d = self.dim();
        let coords = if self.noise.len() == 1 {
            vec![self.noise[0].build()?; d]
        } else {
            self.noise
                .iter()
                .map(NoiseSpec::build)
                .collect::<Result<_>>()?
        };
        NoiseModel::new(coords)
    }

    /// `(M, A)` after checking that `A M` is the identity.
    pub fn maps(&self) -> Result<(Option<LinearMap>, Option<LinearMap>)> {
        let d = self.dim();
        let parse = |rows: &Vec<Vec<f64>>, name: &str| -> Result<LinearMap> {
            if rows.len() != d {
                return Err(Error::Config(format!("{name} must be {d}x{d}")));
            }
            LinearMap::from_rows(rows).map_err(|e| Error::Config(format!("{name}: {e}")))
        };
        let mixing = self
            .mixing
            .as_ref()
            .map(|m| parse(m, "mixing"))
            .transpose()?;
        let decor = match (&self.decorrelation, &mixing) {
            (Some(a), _) => Some(parse(a, "decorrelation")?),
            (None, Some(m)) => Some(m.inverse()),
            (None, None) => None,
        };
        let m = mixing
            .as_ref()
            .map_or_else(|| DMatrix::identity(d, d), |m| m.matrix().clone());
        let a = decor
            .as_ref()
            .map_or_else(|| DMatrix::identity(d, d), |a| a.matrix().clone());
        let gap = (&a * &m - DMatrix::<f64>::identity(d, d)).abs().max();
        if gap > 1e-9 {
            return Err(Error::Config(format!(
                "decorrelation does not invert the mixing (off by {gap:e})"
            )));
        }
        Ok((mixing, decor))
    }

    pub(crate) fn fixed_grid(&self) -> Result<Option<Vec<Axis>>> {
        let nodes = self.grid.nodes.unwrap_or(default_nodes(self.dim()));
        self.grid
            .bounds
            .as_ref()
            .map(|b| {
                b.iter()
                    .map(|&[lo, hi]| Axis::new(lo, hi, nodes))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()
    }

    pub(crate) fn nodes(&self) -> usize {
        self.grid.nodes.unwrap_or(default_nodes(self.dim()))
    }
}

fn default_nodes(d: usize) -> usize {
    match d {
        1 => 1024,
        2 => 128,
        _ => 48,
    }
}

/// Parameters of the lower-bound tracking study.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundStudyConfig {
    pub noise: NoiseSpec,
    pub r: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n_list: Vec<u64>,
}

impl LowerBoundStudyConfig {
    /// Gaussian noise with unit scale and the tail exponents for `p = 1`.
    pub fn gaussian_default() -> Self {
        Self {
            noise: NoiseSpec::Gaussian { sigma: 1.0 },
            r: 2.87,
            kappa1: 0.6,
            kappa2: 3.4,
            beta: 2.0,
            gamma: 2.0,
            n_list: (2..=6).map(|e| 10u64.pow(e)).collect(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.n_list.is_empty() || cfg.n_list.contains(&0) {
            return Err(invalid("n_list must hold positive sample sizes"));
        }
        Ok(cfg)
    }
}
