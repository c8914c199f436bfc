use log::warn;

use super::base::{weighted_power_integral, BasePowerDensity};
use super::perturbation::PerturbationH;
use crate::error::{invalid, Error, Result};
use crate::grid::{Axis, GridDensity};

/// `sup_t sum_s |H(b (t - t_s))| (1 + t^2)^r` for centers `t_s = (s-1)/b`,
/// taken over `window` and the whole region where the bumps are nonzero.
pub fn envelope_constant(h: &PerturbationH, b: usize, window: Axis) -> f64 {
    let bf = b as f64;
    let reach = h.radius / bf + 1.0;
    let lo = window.min.min(-reach);
    let hi = window.max.max(1.0 + reach);
    let step = (1.0 / (16.0 * bf)).min(window.spacing());
    let count = ((hi - lo) / step).ceil() as usize + 1;
    let r = h.r;
    (0..count)
        .map(|i| {
            let t = lo + i as f64 * step;
            let s: f64 = (0..b).map(|k| h.eval(bf * (t - k as f64 / bf)).abs()).sum();
            s * (1.0 + t * t).powf(r)
        })
        .fold(0.0, f64::max)
}

/// `f_theta = f_{0,r} + A sum_s theta_s H(b (t - (s-1)/b))`.
#[derive(Debug, Clone)]
pub struct PerturbationFamily {
    pub base: BasePowerDensity,
    pub b_n: usize,
    pub theta: Vec<bool>,
    pub amplitude: f64,
    /// Envelope constant of the bump sum.
    pub envelope: f64,
}

impl PerturbationFamily {
    /// Fails with an envelope violation when `amplitude` could make the
    /// density negative.
    pub fn new(
        h: &PerturbationH,
        b_n: usize,
        theta: Vec<bool>,
        amplitude: f64,
        window: Axis,
    ) -> Result<Self> {
        if b_n == 0 || theta.len() != b_n {
            return Err(invalid(format!(
                "theta has {} bits for b_n = {b_n}",
                theta.len()
            )));
        }
        if !(amplitude > 0.0) {
            return Err(invalid(format!("amplitude {amplitude} must be positive")));
        }
        let base = BasePowerDensity::new(h.r)?;
        let envelope = envelope_constant(h, b_n, window);
        let max_feasible = base.c_r / envelope;
        if amplitude > max_feasible {
            return Err(Error::EnvelopeViolation {
                amplitude,
                max_feasible,
            });
        }
        Ok(Self {
            base,
            b_n,
            theta,
            amplitude,
            envelope,
        })
    }

    /// Largest amplitude the envelope allows for `b_n` bumps.
    pub fn max_amplitude(h: &PerturbationH, b_n: usize, window: Axis) -> Result<f64> {
        Ok(BasePowerDensity::new(h.r)?.c_r / envelope_constant(h, b_n, window))
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.b_n).map(|s| s as f64 / self.b_n as f64).collect()
    }

    /// Same family with bit `s` (0-based) forced to `value`.
    pub fn with_bit(&self, s: usize, value: bool) -> Self {
        let mut out = self.clone();
        out.theta[s] = value;
        out
    }

    /// `sum_s theta_s H(b (t - t_s))`.
    pub fn bump_sum(&self, h: &PerturbationH, t: f64) -> f64 {
        let b = self.b_n as f64;
        self.theta
            .iter()
            .enumerate()
            .filter(|(_, on)| **on)
            .map(|(s, _)| h.eval(b * (t - s as f64 / b)))
            .sum()
    }

    pub fn tabulate(&self, h: &PerturbationH, axis: Axis) -> Result<GridDensity> {
        GridDensity::from_fn(vec![axis], |x| f_theta_eval(self, h, x[0]))
    }
}

pub fn f_theta_eval(family: &PerturbationFamily, h: &PerturbationH, t: f64) -> f64 {
    family.base.eval(t) + family.amplitude * family.bump_sum(h, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    /// `int (1 + max(t^2, |t|^{2p+2})) f_theta`; over the window only when divergent.
    pub value: f64,
    /// `value <= M`.
    pub member: bool,
    /// `r <= p + 3/2`: the weighted integral of `f_{0,r}` diverges.
    pub divergent: bool,
    /// Moment of the amplitude-scaled envelope `A C (1 + t^2)^{-r}`.
    pub envelope_moment: f64,
}

/// Moment functional of `f_theta` against the bound `m`.
pub fn moment_check_ftheta(
    family: &PerturbationFamily,
    h: &PerturbationH,
    p: f64,
    m: f64,
    window: Axis,
) -> Result<MomentCheck> {
    if !(p >= 1.0) {
        return Err(invalid(format!("order p = {p} must be >= 1")));
    }
    let weight = |t: f64| 1.0 + (t * t).max(t.abs().powf(2.0 * p + 2.0));
    let r = family.base.r;
    let divergent = r <= p + 1.5;
    let (base_part, envelope_moment) = if divergent {
        warn!(
            "r = {r} <= p + 3/2 = {}: moment integral diverges; truncating to the window",
            p + 1.5
        );
        let v = crate::quadrature::integrate(
            |t| weight(t) * family.base.eval(t),
            window.min,
            window.max,
            1e-12,
            1e-10,
        )
        .value;
        (v, f64::INFINITY)
    } else {
        let v = family
            .base
            .weighted_integral(weight)
            .ok_or_else(|| Error::Study("moment quadrature did not converge".into()))?;
        let e = weighted_power_integral(r, weight)
            .ok_or_else(|| Error::Study("envelope quadrature did not converge".into()))?;
        (v, family.amplitude * family.envelope * e)
    };
    // bumps: trapezoid on the H table lattice, exact enough for smooth weights
    let b = family.b_n as f64;
    let dt = h.step / b;
    let steps = (h.radius / h.step).ceil() as i64;
    let mut bump_part = 0.0;
    for (s, _) in family.theta.iter().enumerate().filter(|(_, on)| **on) {
        let c = s as f64 / b;
        let mut acc = 0.0;
        for j in -steps..=steps {
            let u = j as f64 * h.step;
            acc += weight(c + u / b) * h.eval(u);
        }
        bump_part += acc * dt;
    }
    let value = base_part + family.amplitude * bump_part;
    Ok(MomentCheck {
        value,
        member: value <= m,
        divergent,
        envelope_moment,
    })
}
