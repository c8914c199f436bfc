use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Mutex, OnceLock};

use crate::error::{invalid, Result};
use crate::quadrature;

/// `f_{0,r}(t) = C_r (1 + t^2)^{-r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasePowerDensity {
    pub r: f64,
    pub c_r: f64,
}

impl BasePowerDensity {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.5) || !r.is_finite() {
            return Err(invalid(format!("exponent r = {r} must exceed 1/2")));
        }
        Ok(Self {
            r,
            c_r: normalizer(r),
        })
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.c_r * (1.0 + t * t).powf(-self.r)
    }

    /// `int w(t) f_{0,r}(t) dt` through `t = tan(theta)`; `None` when the
    /// quadrature does not converge.
    pub fn weighted_integral<W: Fn(f64) -> f64>(&self, w: W) -> Option<f64> {
        weighted_power_integral(self.r, w).map(|v| self.c_r * v)
    }
}

/// `int w(t) (1 + t^2)^{-r} dt` as `int cos^{2r-2}(theta) w(tan theta) dtheta`.
pub(crate) fn weighted_power_integral<W: Fn(f64) -> f64>(r: f64, w: W) -> Option<f64> {
    let f = |th: f64| {
        let c = th.cos();
        if c <= 0.0 {
            return 0.0;
        }
        c.powf(2.0 * r - 2.0) * w(th.tan())
    };
    let left = quadrature::integrate(f, -FRAC_PI_2, 0.0, 1e-14, 1e-12);
    let right = quadrature::integrate(f, 0.0, FRAC_PI_2, 1e-14, 1e-12);
    (left.converged && right.converged && left.value.is_finite() && right.value.is_finite())
        .then_some(left.value + right.value)
}

/// `C_r = 1 / int (1 + t^2)^{-r} dt`, cached per exponent.
fn normalizer(r: f64) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(&c) = cache.lock().expect("cache poisoned").get(&r.to_bits()) {
        return c;
    }
    let mass = weighted_power_integral(r, |_| 1.0).unwrap_or_else(|| {
        // slowly decaying case: the endpoint singularity is integrable
        let f = |th: f64| th.cos().powf(2.0 * r - 2.0);
        2.0 * quadrature::integrate(f, 0.0, FRAC_PI_2, 1e-12, 1e-9).value
    });
    let c = 1.0 / mass;
    cache.lock().expect("cache poisoned").insert(r.to_bits(), c);
    c
}

/// `C_r (1 + t^2)^{-r}`.
pub fn f0r_eval(r: f64, t: f64) -> Result<f64> {
    Ok(BasePowerDensity::new(r)?.eval(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;
    use std::f64::consts::PI;

    #[test]
    fn examples() {
        assert!((f0r_eval(1.0, 0.0).unwrap() - 1.0 / PI).abs() < 1e-12);
        assert!((f0r_eval(1.0, 1.0).unwrap() - 0.5 / PI).abs() < 1e-12);
        assert!((f0r_eval(3.0, 0.0).unwrap() - 8.0 / (3.0 * PI)).abs() < 1e-12);
        assert!(f0r_eval(0.5, 0.0).is_err());
    }

    #[test]
    fn matches_gamma_closed_form() {
        for &r in &[0.75, 1.3, 2.0, 2.87, 4.5] {
            let exact = (ln_gamma(r) - ln_gamma(r - 0.5)).exp() / PI.sqrt();
            let c = BasePowerDensity::new(r).unwrap().c_r;
            assert!((c - exact).abs() < 1e-8 * exact, "r={r}: {c} vs {exact}");
        }
    }
}
