use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use super::config::TruthSpec;
use crate::error::{invalid, Result};
use crate::grid::GridDensity;
use crate::lowerbound::BasePowerDensity;
use crate::measures::SampleBatch;
use crate::wasserstein::{
    quantize, wp_discrete, wp_grid_power, wp_quantile_1d_power, DiscreteMeasure,
};

/// Sampler and exact reference for a configured latent law.
#[derive(Debug, Clone)]
pub(crate) enum Truth {
    Mixture {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        sds: Vec<f64>,
    },
    Discrete(DiscreteMeasure),
    Power {
        base: BasePowerDensity,
        dim: usize,
    },
}

impl Truth {
    pub fn new(spec: &TruthSpec) -> Result<Self> {
        Ok(match spec {
            TruthSpec::GaussianMixture {
                weights,
                means,
                variances,
            } => {
                let total: f64 = weights.iter().sum();
                Truth::Mixture {
                    weights: weights.iter().map(|w| w / total).collect(),
                    means: means.clone(),
                    sds: variances.iter().map(|v| v.sqrt()).collect(),
                }
            }
            TruthSpec::Discrete { points, weights } => {
                let d = spec.dim();
                Truth::Discrete(DiscreteMeasure::normalized(
                    points.concat(),
                    d,
                    weights.clone(),
                )?)
            }
            TruthSpec::PowerLaw { r, dim } => Truth::Power {
                base: BasePowerDensity::new(*r)?,
                dim: *dim,
            },
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Truth::Mixture { means, .. } => means[0].len(),
            Truth::Discrete(m) => m.dim(),
            Truth::Power { dim, .. } => *dim,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SampleBatch> {
        let d = self.dim();
        let mut points = Vec::with_capacity(n * d);
        match self {
            Truth::Mixture {
                weights,
                means,
                sds,
            } => {
                let pick = WeightedIndex::new(weights).map_err(|e| invalid(e.to_string()))?;
                for _ in 0..n {
                    let c = pick.sample(rng);
                    for &m in &means[c] {
                        let z: f64 = rng.sample(StandardNormal);
                        points.push(m + sds[c] * z);
                    }
                }
            }
            Truth::Discrete(m) => {
                let pick = WeightedIndex::new(m.weights()).map_err(|e| invalid(e.to_string()))?;
                for _ in 0..n {
                    points.extend_from_slice(m.point(pick.sample(rng)));
                }
            }
            Truth::Power { base, .. } => {
                // (1 + t^2)^{-r} is a Student t with 2r - 1 degrees of freedom, rescaled
                let nu = 2.0 * base.r - 1.0;
                let t = StudentT::new(nu).map_err(|e| invalid(e.to_string()))?;
                let scale = nu.sqrt().recip();
                for _ in 0..n * d {
                    points.push(scale * t.sample(rng));
                }
            }
        }
        SampleBatch::new(points, d)
    }

    fn density(&self, x: &[f64]) -> f64 {
        match self {
            Truth::Mixture {
                weights,
                means,
                sds,
            } => weights
                .iter()
                .zip(means)
                .zip(sds)
                .map(|((w, m), s)| {
                    let q: f64 = x.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum();
                    let norm = (2.0 * std::f64::consts::PI * s * s).powf(-0.5 * x.len() as f64);
                    w * norm * (-0.5 * q / (s * s)).exp()
                })
                .sum(),
            Truth::Discrete(_) => f64::NAN,
            Truth::Power { base, .. } => x.iter().map(|&t| base.eval(t)).product(),
        }
    }

    /// `W_p^p` between a normalized estimate and this law. Continuous laws
    /// are tabulated on the estimate's grid.
    pub fn wpp(&self, est: &GridDensity, p: f64, max_atoms: usize) -> Result<f64> {
        match self {
            Truth::Discrete(m) if m.dim() == 1 => wp_quantile_1d_power(est, m, p),
            Truth::Discrete(m) => Ok(wp_discrete(&quantize(est, max_atoms)?, m, p)?.cost_p),
            _ => {
                let reference = GridDensity::from_fn(est.axes().to_vec(), |x| self.density(x))?;
                wp_grid_power(est, &reference, p, max_atoms)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn power_law_sampler_matches_density() {
        let truth = Truth::new(&TruthSpec::PowerLaw { r: 3.0, dim: 1 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = truth.sample(40_000, &mut rng).unwrap();
        let inside = s.as_slice().iter().filter(|t| t.abs() <= 1.0).count() as f64 / 40_000.0;
        // probability of [-1, 1] by quadrature
        let exact =
            crate::quadrature::integrate(|t| truth.density(&[t]), -1.0, 1.0, 1e-12, 1e-10).value;
        assert!((inside - exact).abs() < 0.01, "{inside} vs {exact}");
    }

    #[test]
    fn reference_distance_vanishes_on_itself() {
        let spec = TruthSpec::GaussianMixture {
            weights: vec![1.0, 1.0],
            means: vec![vec![-2.0], vec![2.0]],
            variances: vec![0.25, 0.25],
        };
        let truth = Truth::new(&spec).unwrap();
        let axis = Axis::new(-6.0, 6.0, 1201).unwrap();
        let g = GridDensity::from_fn(vec![axis], |x| truth.density(x)).unwrap();
        assert!(truth.wpp(&g, 1.0, 100).unwrap() < 1e-12);
        let shifted = GridDensity::from_fn(vec![axis], |x| truth.density(&[x[0] - 0.1])).unwrap();
        assert!((truth.wpp(&shifted, 1.0, 100).unwrap() - 0.1).abs() < 1e-6);
    }
}
