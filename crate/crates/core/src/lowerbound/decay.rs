use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::base::BasePowerDensity;
use super::chi2::chi2_divergence;
use super::convolution::fft_convolve;
use super::family::PerturbationFamily;
use super::perturbation::{Bump, PerturbationH};
use super::schedule::{rpkappa_window, Schedule};
use crate::error::{invalid, Error, Result};
use crate::grid::{Axis, GridDensity};
use crate::measures::CoordinateNoise;
use crate::quadrature;

/// Default shared grid: `[-40, 40]` with `2^14` intervals.
pub fn shared_axis() -> Axis {
    Axis::new(-40.0, 40.0, (1 << 14) + 1).expect("valid axis")
}

const SPECTRAL_FFT: usize = 1 << 20;
/// Relative level below which the chi-square integrand is dropped.
const TAIL_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct DecayStudyConfig {
    pub r: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub gamma: f64,
    pub beta: f64,
    pub bn_list: Vec<usize>,
    /// Fraction of the smallest admissible amplitude across `bn_list`.
    pub amplitude_fraction: f64,
    pub bump: Bump,
    pub window: Axis,
    /// Slope must satisfy `slope <= -eta (1 - slack)`.
    pub slack: f64,
    /// Rows with `b_n` up to this value also get a direct grid chi-square.
    pub cross_check_up_to: usize,
}

impl DecayStudyConfig {
    pub fn new(
        r: f64,
        kappa1: f64,
        kappa2: f64,
        gamma: f64,
        beta: f64,
        bn_list: Vec<usize>,
    ) -> Self {
        Self {
            r,
            kappa1,
            kappa2,
            gamma,
            beta,
            bn_list,
            amplitude_fraction: 0.5,
            bump: Bump::default(),
            window: shared_axis(),
            slack: 0.3,
            cross_check_up_to: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub b_n: usize,
    /// May underflow to zero; `log_chi2` stays finite.
    pub chi2: f64,
    pub log_chi2: f64,
    /// `-eta b^beta + const`, anchored at the first row.
    pub predicted: f64,
    /// Direct convolution on the lattice, for small `b_n`.
    pub grid_chi2: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DecayStudy {
    pub rows: Vec<DecayRow>,
    pub eta: f64,
    pub amplitude: f64,
    pub slope: f64,
    pub intercept: f64,
    pub passes: bool,
}

/// Shared inputs of every chi-square evaluation in a study.
pub struct Chi2Setup<'a> {
    pub noise: &'a CoordinateNoise,
    pub h: &'a PerturbationH,
    pub base: BasePowerDensity,
    pub amplitude: f64,
    pub spacing: f64,
    /// Half-width of the noise density support used in convolutions.
    pub noise_reach: f64,
}

impl<'a> Chi2Setup<'a> {
    /// `log chi2(f_0 * g, f_1 * g)` for the pair differing in the first bit
    /// with all other bits zero. The perturbation difference is computed in
    /// the Fourier domain with `ln |g*(b)|` factored out, so the value stays
    /// representable when `chi2` itself underflows.
    pub fn log_chi2(&self, b: usize) -> Result<f64> {
        Ok(self.spectral(b)?.0)
    }

    fn spectral(&self, b: usize) -> Result<(f64, Vec<f64>, Vec<f64>, usize)> {
        if !self.noise.is_symmetric() {
            return Err(invalid(
                "the spectral chi-square route needs symmetric noise",
            ));
        }
        let bf = b as f64;
        let bump = self.h.bump;
        let s_ln = self.noise.ln_char_fn_abs(bf)?;
        let dt = self.spacing;
        let dv = 2.0 * PI / (SPECTRAL_FFT as f64 * bf * dt);
        let nodes = (1.0 / dv).ceil() as usize;
        if nodes >= SPECTRAL_FFT / 2 {
            return Err(Error::Resolution(format!(
                "b = {b} needs a finer frequency lattice"
            )));
        }
        let mut log_profile = Vec::with_capacity(nodes + 1);
        let mut signs = Vec::with_capacity(nodes + 1);
        for k in 0..=nodes {
            let v = 1.0 + k as f64 * dv;
            let lp = bump.ln_eval(v);
            if lp == f64::NEG_INFINITY {
                log_profile.push(lp);
                signs.push(0.0);
                continue;
            }
            log_profile.push(lp + self.noise.ln_char_fn_abs(bf * v)? - s_ln);
            signs.push(self.noise.char_fn(bf * v)?.re.signum());
        }
        let peak = log_profile
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            return Err(Error::Study(format!(
                "perturbation spectrum vanishes at b = {b}"
            )));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); SPECTRAL_FFT];
        for (k, z) in buf.iter_mut().enumerate().take(nodes + 1) {
            *z = Complex64::new(signs[k] * (log_profile[k] - peak).exp(), 0.0);
        }
        FftPlanner::new()
            .plan_fft_inverse(SPECTRAL_FFT)
            .process(&mut buf);
        // scaled difference D(t) / (A e^{S + P}) at t = j dt
        let half = SPECTRAL_FFT / 2;
        let d: Vec<f64> = (0..half)
            .map(|j| (buf[j] * Complex64::from_polar(dv / PI, bf * j as f64 * dt)).re)
            .collect();
        let r = self.base.r;
        let weight: Vec<f64> = d
            .iter()
            .enumerate()
            .map(|(j, v)| v * v * (1.0 + (j as f64 * dt).powi(2)).powf(r))
            .collect();
        let top = weight.iter().copied().fold(0.0, f64::max);
        // beyond the signal the transform sits on a flat roundoff floor that
        // the polynomial weight would otherwise amplify
        let floor = d[3 * half / 4..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let last = (0..half)
            .rposition(|j| weight[j] > TAIL_TOLERANCE * top && d[j].abs() > 4.0 * floor)
            .unwrap_or(0);
        let reach = ((last as f64 * dt).max(self.noise_reach) / dt).ceil() as usize;
        if reach + 2 >= half / 2 {
            return Err(Error::Resolution(format!(
                "chi-square integrand at b = {b} does not decay within the lattice"
            )));
        }
        let h0 = self.h0(reach)?;
        let integrand: Vec<f64> = (0..=2 * reach)
            .map(|i| {
                let j = i.abs_diff(reach);
                d[j] * d[j] / h0[i]
            })
            .collect();
        let integral = quadrature::trapezoid(&integrand, dt);
        let log_chi2 = 2.0 * self.amplitude.ln() + 2.0 * (s_ln + peak) + integral.ln();
        Ok((log_chi2, h0, d, reach))
    }

    /// `f_{0,r} * g` at `t = j dt` for `|j| <= reach`.
    fn h0(&self, reach: usize) -> Result<Vec<f64>> {
        let dt = self.spacing;
        let m = (self.noise_reach / dt).ceil() as usize;
        let g = self.noise_lattice(m)?;
        let n = reach + m;
        let f: Vec<f64> = (0..=2 * n)
            .map(|i| self.base.eval((i as f64 - n as f64) * dt))
            .collect();
        let full = fft_convolve(&f, &g, dt);
        // full[i] sits at (i - n - m) dt
        let out: Vec<f64> = (0..=2 * reach).map(|i| full[i + 2 * m]).collect();
        if let Some((i, v)) = out.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::ZeroDenominator {
                index: i,
                x: (i as f64 - reach as f64) * dt,
                h1: *v,
            });
        }
        Ok(out)
    }

    fn noise_lattice(&self, m: usize) -> Result<Vec<f64>> {
        let dt = self.spacing;
        (0..=2 * m)
            .map(|i| {
                self.noise
                    .density((i as f64 - m as f64) * dt)
                    .ok_or_else(|| invalid(format!("noise {} has no density", self.noise)))
            })
            .collect()
    }

    /// Chi-square from the direct lattice convolution of `H(b .)` with `g`,
    /// on the same lattice as the spectral route.
    fn grid_chi2(&self, b: usize, h0: &[f64], reach: usize) -> Result<f64> {
        let dt = self.spacing;
        let bf = b as f64;
        let m = (self.noise_reach / dt).ceil() as usize;
        let g = self.noise_lattice(m)?;
        let n = reach + m;
        let bumps: Vec<f64> = (0..=2 * n)
            .map(|i| self.h.eval(bf * (i as f64 - n as f64) * dt))
            .collect();
        let full = fft_convolve(&bumps, &g, dt);
        let axis = Axis::new(-(reach as f64) * dt, reach as f64 * dt, 2 * reach + 1)?;
        let g0 = GridDensity::new(vec![axis], h0.to_vec())?;
        let g1 = GridDensity::new(
            vec![axis],
            (0..=2 * reach)
                .map(|i| h0[i] + self.amplitude * full[i + 2 * m])
                .collect(),
        )?;
        chi2_divergence(&g0, &g1)
    }
}

/// Chi-square between the two convolved members differing in one bit,
/// across `bn_list`, with a one-sided regression check of the decay rate.
pub fn chi2_decay_study(noise: &CoordinateNoise, cfg: &DecayStudyConfig) -> Result<DecayStudy> {
    let window = rpkappa_window(1.0, cfg.kappa1, cfg.kappa2)?;
    if window.hi <= cfg.r {
        return Err(Error::Infeasible(format!(
            "r = {} is not below kappa2 - 1/2 = {}",
            cfg.r, window.hi
        )));
    }
    let schedule = Schedule::new(cfg.beta, cfg.gamma, cfg.r, cfg.kappa2)?;
    if cfg.bn_list.is_empty() || cfg.bn_list.contains(&0) {
        return Err(invalid("bn_list must hold positive integers"));
    }
    if !noise.has_density() {
        return Err(invalid(format!("noise {noise} has no density")));
    }
    let h = PerturbationH::cached(cfg.r, cfg.bump)?;
    let mut amplitude = f64::INFINITY;
    for &b in &cfg.bn_list {
        amplitude = amplitude.min(PerturbationFamily::max_amplitude(&h, b, cfg.window)?);
    }
    amplitude *= cfg.amplitude_fraction;
    let setup = Chi2Setup {
        noise,
        h: &h,
        base: BasePowerDensity::new(cfg.r)?,
        amplitude,
        spacing: cfg.window.spacing(),
        noise_reach: cfg.window.max.abs().max(cfg.window.min.abs()),
    };
    let mut rows = Vec::with_capacity(cfg.bn_list.len());
    for &b in &cfg.bn_list {
        let (log_chi2, h0, _, reach) = setup.spectral(b)?;
        let grid_chi2 = if b <= cfg.cross_check_up_to {
            Some(setup.grid_chi2(b, &h0, reach)?)
        } else {
            None
        };
        rows.push(DecayRow {
            b_n: b,
            chi2: log_chi2.exp(),
            log_chi2,
            predicted: 0.0,
            grid_chi2,
        });
    }
    let anchor = rows[0].log_chi2 + schedule.eta * (rows[0].b_n as f64).powf(cfg.beta);
    for row in rows.iter_mut() {
        row.predicted = anchor - schedule.eta * (row.b_n as f64).powf(cfg.beta);
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.b_n as f64).powf(cfg.beta)).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.log_chi2).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let passes = slope <= -schedule.eta * (1.0 - cfg.slack);
    Ok(DecayStudy {
        rows,
        eta: schedule.eta,
        amplitude,
        slope,
        intercept,
        passes,
    })
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return (f64::NAN, my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub t: f64,
    /// `P(|eps - t| <= t^kappa1)`.
    pub probability: f64,
    /// `probability * t^kappa2`.
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct TailTable {
    pub rows: Vec<TailRow>,
    /// Last ratio at most twice the median ratio.
    pub bounded: bool,
}

/// Window probabilities of a noise density scaled by `t^kappa2`.
pub fn tail_condition_check<F: Fn(f64) -> f64>(
    density: F,
    kappa1: f64,
    kappa2: f64,
    t_list: &[f64],
) -> Result<TailTable> {
    if !(kappa1 > 0.0 && kappa1 < 1.0) {
        return Err(invalid(format!("kappa1 = {kappa1} must lie in (0, 1)")));
    }
    if t_list.is_empty() || t_list.iter().any(|t| !(*t > 0.0)) {
        return Err(invalid("t_list must hold positive values"));
    }
    let rows: Vec<TailRow> = t_list
        .iter()
        .map(|&t| {
            let w = t.powf(kappa1);
            let pr = quadrature::integrate(&density, t - w, t + w, 0.0, 1e-10).value;
            TailRow {
                t,
                probability: pr,
                ratio: pr * t.powf(kappa2),
            }
        })
        .collect();
    let mut sorted: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let last = rows.last().expect("nonempty").ratio;
    Ok(TailTable {
        bounded: last <= 2.0 * median,
        rows,
    })
}
