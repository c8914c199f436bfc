//! Symmetric alpha-stable laws and their powered variants.
//!
//! `q_alpha(x) = exp(-|x|^alpha)` is the characteristic function of the
//! standard symmetric alpha-stable law `s_alpha`. The powered density
//! `f_{alpha,k} = s_alpha^k / int s_alpha^k` has characteristic function
//! `q_{alpha,k} / q_{alpha,k}(0)`, where `q_{alpha,k}` is the k-fold
//! self-convolution of `q_alpha`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rustfft::FftPlanner;

use crate::interp::UniformTable;
use crate::quadrature;

/// Tail level below which `exp(-|x|^alpha)` is treated as zero.
pub const TAIL_LEVEL: f64 = 1e-14;

/// Half-width `T` with `exp(-T^alpha) = TAIL_LEVEL`.
pub fn truncation_radius(alpha: f64) -> f64 {
    (-TAIL_LEVEL.ln()).powf(1.0 / alpha)
}

/// Chambers-Mallows-Stuck draw with characteristic function `exp(-|t|^alpha)`.
pub fn sample_symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    if (alpha - 1.0).abs() < 1e-12 {
        return v.tan();
    }
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let b = ((v - alpha * v).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Density of the standard symmetric alpha-stable law, by Fourier inversion.
pub fn stable_density(alpha: f64, x: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-14 {
        return 1.0 / (PI * (1.0 + x * x));
    }
    if (alpha - 2.0).abs() < 1e-14 {
        return (-x * x / 4.0).exp() / (2.0 * PI.sqrt());
    }
    let upper = 40f64.powf(1.0 / alpha);
    let r = quadrature::integrate(
        |t| (x * t).cos() * (-t.powf(alpha)).exp(),
        0.0,
        upper,
        1e-14,
        1e-11,
    );
    r.value / PI
}

/// Tabulated characteristic function of the powered-stable density.
#[derive(Debug)]
pub struct PoweredStableTable {
    pub alpha: f64,
    pub k: u32,
    /// Unnormalized `q_{alpha,k}(0)`.
    pub q0: f64,
    table: UniformTable,
    density_norm: OnceLock<f64>,
}

impl PoweredStableTable {
    /// Builds the table by FFT self-convolution at steps `h` and `2h`,
    /// combined with one Richardson step.
    pub fn build(alpha: f64, k: u32) -> Self {
        assert!(alpha > 0.0 && alpha < 2.0 && k >= 1);
        let radius = truncation_radius(alpha);
        let h = (1.0 / 128.0f64).min(radius / (1u64 << 17) as f64);
        let mut half = (radius / h).ceil() as usize;
        half += half % 2;
        let fine = fft_power(alpha, k, h, half);
        let coarse = fft_power(alpha, k, 2.0 * h, half / 2);
        let order = (1.0 + alpha).min(2.0);
        let gain = 2f64.powf(order);
        // fine has k*half nodes per side at step h; coarse has k*half/2 at 2h
        let per_side = k as usize * half / 2;
        let fine_center = k as usize * half;
        let coarse_center = per_side;
        let mut values = Vec::with_capacity(2 * per_side + 1);
        for j in 0..=2 * per_side {
            let off = j as isize - per_side as isize;
            let f = fine[(fine_center as isize + 2 * off) as usize];
            let c = coarse[(coarse_center as isize + off) as usize];
            values.push(((gain * f - c) / (gain - 1.0)).max(0.0));
        }
        let q0 = values[per_side];
        for v in values.iter_mut() {
            *v /= q0;
        }
        // enforce exact symmetry
        for j in 0..per_side {
            let avg = 0.5 * (values[j] + values[2 * per_side - j]);
            values[j] = avg;
            values[2 * per_side - j] = avg;
        }
        values[per_side] = 1.0;
        let step = 2.0 * h;
        Self {
            alpha,
            k,
            q0,
            table: UniformTable::new(-(per_side as f64) * step, step, values),
            density_norm: OnceLock::new(),
        }
    }

    /// Shared, lazily built table for `(alpha, k)`.
    pub fn cached(alpha: f64, k: u32) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<OnceLock<Arc<PoweredStableTable>>>>>> =
            OnceLock::new();
        let slot = {
            let mut map = CACHE
                .get_or_init(Default::default)
                .lock()
                .expect("stable cache poisoned");
            map.entry((alpha.to_bits(), k)).or_default().clone()
        };
        slot.get_or_init(|| Arc::new(Self::build(alpha, k))).clone()
    }

    pub fn step(&self) -> f64 {
        self.table.step
    }

    pub fn radius(&self) -> f64 {
        self.table.end()
    }

    /// `q_{alpha,k}(t) / q_{alpha,k}(0)`; zero beyond the table.
    pub fn eval(&self, t: f64) -> f64 {
        self.table.cubic(t, 0.0).max(0.0)
    }

    /// Value at node `i` counted from zero on the non-negative side.
    pub fn node_value(&self, i: usize) -> Option<f64> {
        let center = (self.table.values.len() - 1) / 2;
        self.table.values.get(center + i).copied()
    }

    /// Density `s_alpha(x)^k / int s_alpha^k`.
    pub fn density(&self, x: f64) -> f64 {
        let z = *self.density_norm.get_or_init(|| {
            let k = self.k as i32;
            quadrature::integrate_line(|u| stable_density(self.alpha, u).powi(k), 0.0, 1e-13, 1e-10)
                .value
        });
        stable_density(self.alpha, x).powi(self.k as i32) / z
    }
}

/// `q_alpha` sampled on `[-half*h, half*h]` and raised to the k-th
/// convolution power; returns `k*2*half + 1` nodes centred on zero.
fn fft_power(alpha: f64, k: u32, h: f64, half: usize) -> Vec<f64> {
    let len_in = 2 * half + 1;
    let len_out = k as usize * 2 * half + 1;
    let n = len_out.next_power_of_two();
    let mut buf: Vec<Complex64> = (0..n)
        .map(|i| {
            if i < len_in {
                let x = (i as f64 - half as f64) * h;
                Complex64::new((-x.abs().powf(alpha)).exp(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for z in buf.iter_mut() {
        *z = z.powu(k);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = h.powi(k as i32 - 1) / n as f64;
    buf[..len_out].iter().map(|z| z.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn radius_meets_tail_level() {
        for &a in &[0.5, 1.0, 1.5] {
            let t = truncation_radius(a);
            assert!(((-t.powf(a)).exp() - TAIL_LEVEL).abs() < 1e-20);
        }
    }

    #[test]
    fn alpha_one_pair_matches_closed_form() {
        let tab = PoweredStableTable::build(1.0, 2);
        // q_{1,2}(x) = (1+|x|) e^{-|x|}, q_{1,2}(0) = 1
        assert!((tab.q0 - 1.0).abs() < 1e-8, "q0 = {}", tab.q0);
        for &t in &[0.0, 0.5, 1.0, 2.0, 5.0, -3.0] {
            let exact = (1.0 + f64::abs(t)) * (-f64::abs(t)).exp();
            assert!(
                (tab.eval(t) - exact).abs() < 1e-8,
                "t={t}: {} vs {exact}",
                tab.eval(t)
            );
        }
    }

    #[test]
    fn k_one_is_the_base_function() {
        let tab = PoweredStableTable::build(1.5, 1);
        for &t in &[0.0, 0.3, 1.0, 2.5] {
            assert!((tab.eval(t) - (-f64::powf(t, 1.5)).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn stable_density_special_cases_and_mass() {
        assert!((stable_density(1.0, 0.0) - 1.0 / PI).abs() < 1e-15);
        // window mass plus the leading-order Pareto tail outside it
        let (alpha, l) = (1.5, 60.0);
        let r = quadrature::integrate(|x| stable_density(alpha, x), -l, l, 1e-10, 1e-9);
        let tail = 2.0 * statrs::function::gamma::gamma(1.0 + alpha) * (PI * alpha / 2.0).sin()
            / (PI * alpha * l.powf(alpha));
        assert!((r.value + tail - 1.0).abs() < 2e-5, "{} + {tail}", r.value);
        // alpha -> 2 limit agrees with the inversion integral near 2
        let near = stable_density(1.999_999, 0.7);
        assert!((near - stable_density(2.0, 0.7)).abs() < 1e-5);
    }

    #[test]
    fn stable_sampler_tracks_cauchy_cdf() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 40_000;
        let below: usize = (0..n)
            .filter(|_| sample_symmetric_stable(1.0, &mut rng) <= 1.0)
            .count();
        assert!((below as f64 / n as f64 - 0.75).abs() < 0.01);
    }
}
