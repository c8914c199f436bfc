//! Known noise laws: characteristic functions, samplers, densities and the
//! smoothness parameters that drive bandwidth and lower-bound schedules.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use super::sample::SampleBatch;
use super::stable::{sample_symmetric_stable, stable_density, PoweredStableTable};
use crate::error::{invalid, Error, Result};
use crate::interp::UniformTable;

/// Characteristic function given by samples on a uniform grid.
#[derive(Debug, Clone)]
pub struct CharFnTable {
    re: UniformTable,
    im: UniformTable,
}

impl CharFnTable {
    pub fn new(start: f64, step: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(step > 0.0) || values.len() < 2 {
            return Err(invalid(
                "tabulated characteristic function needs a positive step and two nodes",
            ));
        }
        Ok(Self {
            re: UniformTable::new(start, step, values.iter().map(|z| z.re).collect()),
            im: UniformTable::new(start, step, values.iter().map(|z| z.im).collect()),
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.re.start, self.re.end())
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        if !self.re.contains(t) {
            let (min, max) = self.range();
            return Err(Error::OutOfRange { t, min, max });
        }
        Ok(Complex64::new(self.re.cubic(t, 0.0), self.im.cubic(t, 0.0)))
    }
}

/// One coordinate's error law.
#[derive(Debug, Clone)]
pub enum NoiseKind {
    DiracZero,
    Gaussian {
        sigma: f64,
    },
    Laplace {
        b: f64,
    },
    Cauchy {
        s: f64,
    },
    /// Standard symmetric stable law, characteristic function `exp(-|t|^alpha)`.
    Stable {
        alpha: f64,
    },
    PoweredStable {
        alpha: f64,
        k: u32,
        table: Arc<PoweredStableTable>,
    },
    Tabulated(Arc<CharFnTable>),
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::DiracZero => "dirac-zero",
            NoiseKind::Gaussian { .. } => "gaussian",
            NoiseKind::Laplace { .. } => "laplace",
            NoiseKind::Cauchy { .. } => "cauchy",
            NoiseKind::Stable { .. } => "stable",
            NoiseKind::PoweredStable { .. } => "powered-stable",
            NoiseKind::Tabulated(_) => "tabulated",
        }
    }
}

/// Decay parameters of `|char_fn|` and of `r = 1/char_fn`.
///
/// `gamma1` is the scale in the lower-bound condition
/// `|g*(w)| (1+|w|)^{-beta_tilde} exp(|w|^beta / gamma1) <= c1`;
/// `gamma2` the scale in `|r^(l)(t)| <= c2 (1+|t|^beta_tilde) exp(|t|^beta / gamma2)`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct Smoothness {
    pub beta: f64,
    pub beta_tilde: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Smoothness {
    pub fn supersmooth(beta: f64, gamma1: f64, gamma2: f64) -> Self {
        Self {
            beta,
            beta_tilde: 0.0,
            gamma1,
            gamma2,
            c1: 1.0,
            c2: 1.0,
        }
    }

    /// Placeholder for laws that are not supersmooth (beta = 0).
    pub fn none() -> Self {
        Self {
            beta: 0.0,
            beta_tilde: 0.0,
            gamma1: f64::INFINITY,
            gamma2: f64::INFINITY,
            c1: 1.0,
            c2: 1.0,
        }
    }

    pub fn is_supersmooth(&self) -> bool {
        self.beta > 0.0 && self.gamma2.is_finite() && self.gamma2 > 0.0
    }
}

#[derive(Debug, Clone)]
pub struct CoordinateNoise {
    pub kind: NoiseKind,
    pub smoothness: Smoothness,
}

impl CoordinateNoise {
    pub fn dirac_zero() -> Self {
        Self {
            kind: NoiseKind::DiracZero,
            smoothness: Smoothness::none(),
        }
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        let g = 2.0 / (sigma * sigma);
        Ok(Self {
            kind: NoiseKind::Gaussian { sigma },
            smoothness: Smoothness::supersmooth(2.0, g, g),
        })
    }

    pub fn laplace(b: f64) -> Result<Self> {
        positive("b", b)?;
        let mut smoothness = Smoothness::none();
        smoothness.beta_tilde = 2.0;
        Ok(Self {
            kind: NoiseKind::Laplace { b },
            smoothness,
        })
    }

    pub fn cauchy(s: f64) -> Result<Self> {
        positive("s", s)?;
        Ok(Self {
            kind: NoiseKind::Cauchy { s },
            smoothness: Smoothness::supersmooth(1.0, 1.0 / s, 1.0 / s),
        })
    }

    pub fn stable(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(invalid(format!(
                "stable index alpha = {alpha} must lie in (0, 2]"
            )));
        }
        Ok(Self {
            kind: NoiseKind::Stable { alpha },
            smoothness: Smoothness::supersmooth(alpha, 1.0, 1.0),
        })
    }

    /// The density `s_alpha^k / int s_alpha^k`; its characteristic function
    /// decays between `exp(-|t|^alpha)` and `exp(-|t|^alpha / 2^{(k-1) alpha})`.
    pub fn powered_stable(alpha: f64, k: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(invalid(format!(
                "powered-stable index alpha = {alpha} must lie in (0, 2)"
            )));
        }
        if k < 1 {
            return Err(invalid("powered-stable power k must be at least 1"));
        }
        let table = PoweredStableTable::cached(alpha, k);
        let gamma1 = 2f64.powf((k - 1) as f64 * alpha);
        Ok(Self {
            kind: NoiseKind::PoweredStable { alpha, k, table },
            smoothness: Smoothness::supersmooth(alpha, gamma1, 1.0),
        })
    }

    pub fn tabulated(table: CharFnTable, smoothness: Smoothness) -> Self {
        Self {
            kind: NoiseKind::Tabulated(Arc::new(table)),
            smoothness,
        }
    }

    pub fn with_smoothness(mut self, smoothness: Smoothness) -> Self {
        self.smoothness = smoothness;
        self
    }

    pub fn char_fn(&self, t: f64) -> Result<Complex64> {
        let re = match &self.kind {
            NoiseKind::DiracZero => 1.0,
            NoiseKind::Gaussian { sigma } => (-0.5 * sigma * sigma * t * t).exp(),
            NoiseKind::Laplace { b } => 1.0 / (1.0 + b * b * t * t),
            NoiseKind::Cauchy { s } => (-s * t.abs()).exp(),
            NoiseKind::Stable { alpha } => (-t.abs().powf(*alpha)).exp(),
            NoiseKind::PoweredStable { table, .. } => table.eval(t),
            NoiseKind::Tabulated(table) => return table.eval(t),
        };
        Ok(Complex64::new(re, 0.0))
    }

    /// `ln |char_fn(t)|`, finite even where the value itself underflows.
    pub fn ln_char_fn_abs(&self, t: f64) -> Result<f64> {
        Ok(match &self.kind {
            NoiseKind::DiracZero => 0.0,
            NoiseKind::Gaussian { sigma } => -0.5 * sigma * sigma * t * t,
            NoiseKind::Laplace { b } => -(b * b * t * t).ln_1p(),
            NoiseKind::Cauchy { s } => -s * t.abs(),
            NoiseKind::Stable { alpha } => -t.abs().powf(*alpha),
            NoiseKind::PoweredStable { table, .. } => table.eval(t).ln(),
            NoiseKind::Tabulated(table) => table.eval(t)?.norm().ln(),
        })
    }

    /// True when the characteristic function is real and even.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self.kind, NoiseKind::Tabulated(_))
    }

    /// Density where one is available.
    pub fn density(&self, x: f64) -> Option<f64> {
        match &self.kind {
            NoiseKind::DiracZero | NoiseKind::Tabulated(_) => None,
            NoiseKind::Gaussian { sigma } => {
                Some((-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt()))
            }
            NoiseKind::Laplace { b } => Some((-x.abs() / b).exp() / (2.0 * b)),
            NoiseKind::Cauchy { s } => Some(s / (PI * (s * s + x * x))),
            NoiseKind::Stable { alpha } => Some(stable_density(*alpha, x)),
            NoiseKind::PoweredStable { table, .. } => Some(table.density(x)),
        }
    }

    pub fn has_density(&self) -> bool {
        !matches!(self.kind, NoiseKind::DiracZero | NoiseKind::Tabulated(_))
    }

    pub fn has_sampler(&self) -> bool {
        !matches!(
            self.kind,
            NoiseKind::PoweredStable { .. } | NoiseKind::Tabulated(_)
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(match &self.kind {
            NoiseKind::DiracZero => 0.0,
            NoiseKind::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
            NoiseKind::Laplace { b } => {
                let u: f64 = rng.random::<f64>() - 0.5;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            NoiseKind::Cauchy { s } => s * (PI * (rng.random::<f64>() - 0.5)).tan(),
            NoiseKind::Stable { alpha } => sample_symmetric_stable(*alpha, rng),
            other => return Err(Error::UnsupportedSampler(other.name().to_string())),
        })
    }

    /// Derivatives `r^(l)(t)` of `r = 1/char_fn` for `l = 0..=order`.
    ///
    /// Closed forms for gaussian, laplace, cauchy and dirac-zero; central
    /// finite differences (relative step 1e-4) otherwise.
    pub fn reciprocal_derivatives(&self, t: f64, order: usize) -> Result<Vec<f64>> {
        match &self.kind {
            NoiseKind::DiracZero => {
                let mut v = vec![0.0; order + 1];
                v[0] = 1.0;
                Ok(v)
            }
            NoiseKind::Gaussian { sigma } => {
                // r^(l) = P_l(t) r(t), P_{l+1} = P_l' + s2 t P_l
                let s2 = sigma * sigma;
                let r = (0.5 * s2 * t * t).exp();
                let mut poly = vec![1.0];
                let mut out = Vec::with_capacity(order + 1);
                for _ in 0..=order {
                    out.push(eval_poly(&poly, t) * r);
                    let mut next = vec![0.0; poly.len() + 1];
                    for (i, c) in poly.iter().enumerate() {
                        if i > 0 {
                            next[i - 1] += i as f64 * c;
                        }
                        next[i + 1] += s2 * c;
                    }
                    poly = next;
                }
                Ok(out)
            }
            NoiseKind::Laplace { b } => {
                let b2 = b * b;
                Ok((0..=order)
                    .map(|l| match l {
                        0 => 1.0 + b2 * t * t,
                        1 => 2.0 * b2 * t,
                        2 => 2.0 * b2,
                        _ => 0.0,
                    })
                    .collect())
            }
            NoiseKind::Cauchy { s } => {
                let e = (s * t.abs()).exp();
                Ok((0..=order)
                    .map(|l| (s * t.signum()).powi(l as i32) * e)
                    .collect())
            }
            _ => self.finite_difference_derivatives(t, order),
        }
    }

    fn finite_difference_derivatives(&self, t: f64, order: usize) -> Result<Vec<f64>> {
        let step = 1e-4 * t.abs().max(1.0);
        let r = |x: f64| -> Result<f64> { Ok(1.0 / self.char_fn(x)?.re) };
        let mut out = vec![r(t)?];
        for l in 1..=order {
            // central difference of order l with binomial weights
            let mut acc = 0.0;
            let half = l as f64 / 2.0;
            let mut binom = 1.0;
            for i in 0..=l {
                let x = t + (i as f64 - half) * step;
                let sign = if (l - i) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binom * r(x)?;
                binom = binom * (l - i) as f64 / (i + 1) as f64;
            }
            out.push(acc / step.powi(l as i32));
        }
        Ok(out)
    }
}

fn eval_poly(coef: &[f64], t: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {v} must be positive and finite")))
    }
}

impl fmt::Display for CoordinateNoise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NoiseKind::DiracZero => write!(f, "dirac-zero"),
            NoiseKind::Gaussian { sigma } => write!(f, "gaussian(sigma={sigma})"),
            NoiseKind::Laplace { b } => write!(f, "laplace(b={b})"),
            NoiseKind::Cauchy { s } => write!(f, "cauchy(s={s})"),
            NoiseKind::Stable { alpha } => write!(f, "stable(alpha={alpha})"),
            NoiseKind::PoweredStable { alpha, k, .. } => {
                write!(f, "powered-stable(alpha={alpha}, k={k})")
            }
            NoiseKind::Tabulated(t) => write!(f, "tabulated{:?}", t.range()),
        }
    }
}

/// Product noise law with independent coordinates.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub coords: Vec<CoordinateNoise>,
}

impl NoiseModel {
    pub fn new(coords: Vec<CoordinateNoise>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("noise model needs at least one coordinate"));
        }
        Ok(Self { coords })
    }

    /// The same law on each of `dim` coordinates.
    pub fn iid(coord: CoordinateNoise, dim: usize) -> Result<Self> {
        Self::new(vec![coord; dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, j: usize) -> Result<&CoordinateNoise> {
        self.coords.get(j).ok_or(Error::CoordinateOutOfRange {
            index: j,
            dim: self.dim(),
        })
    }

    /// Common `(beta, gamma2)` valid for every coordinate: the largest beta
    /// and the smallest gamma2 over the supersmooth coordinates.
    pub fn rate_parameters(&self) -> Option<(f64, f64)> {
        let smooth: Vec<_> = self
            .coords
            .iter()
            .filter(|c| c.smoothness.is_supersmooth())
            .collect();
        if smooth.is_empty() {
            return None;
        }
        let beta = smooth.iter().map(|c| c.smoothness.beta).fold(0.0, f64::max);
        let gamma2 = smooth
            .iter()
            .map(|c| c.smoothness.gamma2)
            .fold(f64::INFINITY, f64::min);
        Some((beta, gamma2))
    }
}

/// `mu_eps,j^*(t)` with 0-based coordinate `j`.
pub fn char_fn_eval(model: &NoiseModel, j: usize, t: f64) -> Result<Complex64> {
    if !t.is_finite() {
        return Err(invalid("t must be finite"));
    }
    model.coord(j)?.char_fn(t)
}

/// `n` i.i.d. draws from the product law, reproducible for a fixed seed.
pub fn sample_noise(model: &NoiseModel, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(invalid("sample count must be at least 1"));
    }
    if let Some(c) = model.coords.iter().find(|c| !c.has_sampler()) {
        return Err(Error::UnsupportedSampler(c.kind.name().to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_noise_with(model, n, &mut rng)
}

pub(crate) fn sample_noise_with<R: Rng + ?Sized>(
    model: &NoiseModel,
    n: usize,
    rng: &mut R,
) -> Result<SampleBatch> {
    let d = model.dim();
    let mut points = Vec::with_capacity(n * d);
    for _ in 0..n {
        for c in &model.coords {
            points.push(c.sample(rng)?);
        }
    }
    SampleBatch::new(points, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_kinds() -> Vec<CoordinateNoise> {
        vec![
            CoordinateNoise::dirac_zero(),
            CoordinateNoise::gaussian(1.3).unwrap(),
            CoordinateNoise::laplace(0.7).unwrap(),
            CoordinateNoise::cauchy(0.5).unwrap(),
            CoordinateNoise::stable(1.2).unwrap(),
            CoordinateNoise::powered_stable(1.0, 2).unwrap(),
        ]
    }

    #[test]
    fn gaussian_values() {
        let m = NoiseModel::iid(CoordinateNoise::gaussian(1.0).unwrap(), 1).unwrap();
        assert_eq!(char_fn_eval(&m, 0, 0.0).unwrap(), Complex64::new(1.0, 0.0));
        let v = char_fn_eval(&m, 0, 1.0).unwrap();
        assert!((v.re - (-0.5f64).exp()).abs() < 1e-15 && v.im == 0.0);
        assert!(char_fn_eval(&m, 1, 1.0).is_err());
    }

    #[test]
    fn powered_stable_alpha_one_k_two() {
        let m = NoiseModel::iid(CoordinateNoise::powered_stable(1.0, 2).unwrap(), 1).unwrap();
        let v = char_fn_eval(&m, 0, 1.0).unwrap().re;
        assert!((v - 2.0 / std::f64::consts::E).abs() < 1e-8, "{v}");
    }

    #[test]
    fn char_fn_invariants_on_grid() {
        for c in all_kinds() {
            assert!((c.char_fn(0.0).unwrap() - 1.0).norm() < 1e-12, "{c}");
            for i in -400..=400 {
                let t = i as f64 * 0.05;
                let z = c.char_fn(t).unwrap();
                let w = c.char_fn(-t).unwrap();
                assert!(z.norm() <= 1.0 + 1e-12, "{c} at {t}");
                assert!((z - w.conj()).norm() < 1e-12, "{c} at {t}");
            }
        }
    }

    #[test]
    fn tabulated_out_of_range() {
        let vals: Vec<Complex64> = (0..21)
            .map(|i| Complex64::new((-(i as f64 - 10.0).powi(2) / 50.0).exp(), 0.0))
            .collect();
        let c = CoordinateNoise::tabulated(
            CharFnTable::new(-10.0, 1.0, vals).unwrap(),
            Smoothness::none(),
        );
        assert!(c.char_fn(3.5).is_ok());
        assert!(matches!(c.char_fn(10.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn samplers() {
        let m = NoiseModel::iid(CoordinateNoise::dirac_zero(), 2).unwrap();
        let b = sample_noise(&m, 3, 11).unwrap();
        assert_eq!(b.as_slice(), &[0.0; 6]);
        let p = NoiseModel::iid(CoordinateNoise::powered_stable(1.0, 2).unwrap(), 1).unwrap();
        assert!(matches!(
            sample_noise(&p, 3, 1),
            Err(Error::UnsupportedSampler(_))
        ));
        let g = NoiseModel::iid(CoordinateNoise::gaussian(1.0).unwrap(), 1).unwrap();
        assert_eq!(
            sample_noise(&g, 5, 9).unwrap(),
            sample_noise(&g, 5, 9).unwrap()
        );
    }

    #[test]
    fn reciprocal_derivatives_gaussian_against_differences() {
        let c = CoordinateNoise::gaussian(0.8).unwrap();
        let t = 1.3;
        let exact = c.reciprocal_derivatives(t, 3).unwrap();
        let fd = c.finite_difference_derivatives(t, 3).unwrap();
        for l in 0..=3 {
            let rel = (exact[l] - fd[l]).abs() / exact[l].abs();
            assert!(rel < 1e-3, "order {l}: {} vs {}", exact[l], fd[l]);
        }
    }

    #[test]
    fn laplace_sampler_variance() {
        let c = CoordinateNoise::laplace(0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let var = (0..n)
            .map(|_| c.sample(&mut rng).unwrap().powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((var - 0.5).abs() < 0.02, "{var}");
    }

    #[test]
    fn densities_integrate_to_one() {
        for c in all_kinds().into_iter().filter(|c| c.has_density()) {
            if matches!(c.kind, NoiseKind::PoweredStable { .. }) {
                continue;
            }
            let r = match c.kind {
                // heavy tails: finite window plus the leading Pareto tail term
                NoiseKind::Stable { alpha } => {
                    let l = 60.0;
                    let w =
                        crate::quadrature::integrate(|x| c.density(x).unwrap(), -l, l, 1e-10, 1e-9)
                            .value;
                    let g = statrs::function::gamma::gamma(1.0 + alpha);
                    w + 2.0 * g * (std::f64::consts::PI * alpha / 2.0).sin()
                        / (std::f64::consts::PI * alpha * l.powf(alpha))
                }
                _ => {
                    crate::quadrature::integrate_line(|x| c.density(x).unwrap(), 0.0, 1e-10, 1e-10)
                        .value
                }
            };
            assert!((r - 1.0).abs() < 1e-4, "{c}: {r}");
        }
    }
}
