use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::interp::hermite;
use crate::quadrature;

/// Table step of `H`.
const STEP: f64 = 1.0 / 64.0;
/// FFT length; covers `|t| < FFT_LEN * STEP / 2`.
const FFT_LEN: usize = 1 << 19;
/// `H` is treated as zero once it stays below this fraction of `H(0)`.
const CUTOFF: f64 = 1e-13;

/// Smooth bump `exp(-s / ((w - 1)(2 - w)))` on `(1, 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub sharpness: f64,
}

impl Default for Bump {
    fn default() -> Self {
        Self { sharpness: 1.0 }
    }
}

impl Bump {
    pub fn eval(&self, w: f64) -> f64 {
        if w <= 1.0 || w >= 2.0 {
            return 0.0;
        }
        (-self.sharpness / ((w - 1.0) * (2.0 - w))).exp()
    }

    /// `ln phi(w)`, `-inf` outside the support.
    pub fn ln_eval(&self, w: f64) -> f64 {
        if w <= 1.0 || w >= 2.0 {
            return f64::NEG_INFINITY;
        }
        -self.sharpness / ((w - 1.0) * (2.0 - w))
    }
}

/// Band-limited perturbation `H(t) = (1/pi) int_1^2 phi(w) cos(wt) dw`,
/// its derivative and primitive `H^{(-1)}(t) = int_{-inf}^t H`, tabulated on
/// `[0, radius]`; `H` is even and both tables vanish beyond the radius.
#[derive(Debug)]
pub struct PerturbationH {
    pub r: f64,
    pub bump: Bump,
    pub step: f64,
    /// `|H(t)| < CUTOFF * H(0)` for `|t| > radius`.
    pub radius: f64,
    h: Vec<f64>,
    dh: Vec<f64>,
    ddh: Vec<f64>,
    primitive: Vec<f64>,
    /// `sup |H(t)| (1 + t^2)^r` over the table.
    pub decay_constant: f64,
    /// `int_0^1 |H^{(-1)}(u)| du`.
    pub primitive_l1: f64,
    /// `int H` over the table.
    pub integral: f64,
    /// Largest `|H^(w)|` on the probe grid outside `[1, 2]`.
    pub spectral_leak: f64,
}

impl PerturbationH {
    pub fn eval(&self, t: f64) -> f64 {
        self.lookup(t.abs(), &self.h, &self.dh)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        t.signum() * self.lookup(t.abs(), &self.dh, &self.ddh)
    }

    /// `H^{(-1)}(t)`; odd in `t`.
    pub fn primitive(&self, t: f64) -> f64 {
        t.signum() * self.lookup(t.abs(), &self.primitive, &self.h)
    }

    fn lookup(&self, t: f64, values: &[f64], derivs: &[f64]) -> f64 {
        if t > self.radius {
            return 0.0;
        }
        let s = t / self.step;
        let i = (s.floor() as usize).min(values.len() - 2);
        hermite(
            i as f64 * self.step,
            self.step,
            values[i],
            values[i + 1],
            derivs[i],
            derivs[i + 1],
            t,
        )
    }

    /// `H^(w) = int H(t) cos(wt) dt` by the trapezoid rule on the table.
    pub fn fourier(&self, w: f64) -> f64 {
        let mut acc = 0.5 * self.h[0];
        for (i, &v) in self.h.iter().enumerate().skip(1) {
            acc += v * (w * i as f64 * self.step).cos();
        }
        2.0 * acc * self.step
    }

    pub fn table_len(&self) -> usize {
        self.h.len()
    }

    /// Shared instance for `(r, bump)`.
    pub fn cached(r: f64, bump: Bump) -> Result<Arc<Self>> {
        type Slot = Arc<OnceLock<std::result::Result<Arc<PerturbationH>, String>>>;
        static CACHE: OnceLock<Mutex<HashMap<(u64, u64), Slot>>> = OnceLock::new();
        let slot = {
            let mut map = CACHE
                .get_or_init(Default::default)
                .lock()
                .expect("cache poisoned");
            map.entry((r.to_bits(), bump.sharpness.to_bits()))
                .or_default()
                .clone()
        };
        slot.get_or_init(|| build_h(r, bump).map(Arc::new).map_err(|e| e.to_string()))
            .clone()
            .map_err(Error::Study)
    }
}

/// Tabulates `H` by FFT and certifies zero mean, a positive primitive
/// mass on `[0, 1]`, the spectral support and the polynomial envelope.
pub fn build_h(r: f64, bump: Bump) -> Result<PerturbationH> {
    if !(r > 0.5) {
        return Err(invalid(format!("decay target r = {r} must exceed 1/2")));
    }
    if !(bump.sharpness > 0.0) {
        return Err(invalid("bump sharpness must be positive"));
    }
    // w_k = 1 + k dw with dw * STEP = 2 pi / FFT_LEN
    let dw = 2.0 * PI / (FFT_LEN as f64 * STEP);
    let nodes = (1.0 / dw).ceil() as usize;
    let transform = |weight: &dyn Fn(f64) -> f64| -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); FFT_LEN];
        for (k, z) in buf.iter_mut().enumerate().take(nodes + 1) {
            let w = 1.0 + k as f64 * dw;
            *z = Complex64::new(bump.eval(w) * weight(w), 0.0);
        }
        FftPlanner::new()
            .plan_fft_inverse(FFT_LEN)
            .process(&mut buf);
        buf
    };
    let half = FFT_LEN / 2;
    let rotate = |buf: &[Complex64], j: usize| -> Complex64 {
        let t = j as f64 * STEP;
        buf[j] * Complex64::from_polar(dw / PI, t)
    };
    let plain = transform(&|_| 1.0);
    let weighted = transform(&|w| w);
    let squared = transform(&|w| w * w);
    let inverse = transform(&|w| 1.0 / w);
    let mut h: Vec<f64> = (0..half).map(|j| rotate(&plain, j).re).collect();
    let h0 = h[0];
    let last = h
        .iter()
        .rposition(|v| v.abs() > CUTOFF * h0)
        .unwrap_or(1)
        .max(1)
        + 1;
    let count = (last + 1).min(half);
    h.truncate(count);
    let dh: Vec<f64> = (0..count).map(|j| -rotate(&weighted, j).im).collect();
    let ddh: Vec<f64> = (0..count).map(|j| -rotate(&squared, j).re).collect();
    let primitive: Vec<f64> = (0..count).map(|j| rotate(&inverse, j).im).collect();
    let radius = (count - 1) as f64 * STEP;

    let integral = 2.0 * quadrature::trapezoid(&h, STEP);
    let decay_constant = h
        .iter()
        .enumerate()
        .map(|(j, v)| v.abs() * (1.0 + (j as f64 * STEP).powi(2)).powf(r))
        .fold(0.0, f64::max);

    let mut out = PerturbationH {
        r,
        bump,
        step: STEP,
        radius,
        h,
        dh,
        ddh,
        primitive,
        decay_constant,
        primitive_l1: 0.0,
        integral,
        spectral_leak: 0.0,
    };
    out.primitive_l1 =
        quadrature::integrate(|u| out.primitive(u).abs(), 0.0, 1.0, 1e-15, 1e-10).value;
    let probes = (0..10)
        .map(|i| i as f64 * 0.1)
        .chain((0..10).map(|i| 2.05 + i as f64 * 0.2))
        .chain([0.999, 2.001]);
    out.spectral_leak = probes.map(|w| out.fourier(w).abs()).fold(0.0, f64::max);

    if out.integral.abs() > 1e-8 {
        return Err(Error::Certification {
            property: "zero mean",
            detail: format!("int H = {}", out.integral),
        });
    }
    if !(out.primitive_l1 > 0.0) {
        return Err(Error::Certification {
            property: "primitive mass",
            detail: format!("{}", out.primitive_l1),
        });
    }
    if out.spectral_leak > 1e-10 {
        return Err(Error::Certification {
            property: "spectral support",
            detail: format!("leak {}", out.spectral_leak),
        });
    }
    if !out.decay_constant.is_finite() {
        return Err(Error::Certification {
            property: "polynomial envelope",
            detail: "infinite decay constant".into(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(bump: Bump, t: f64, weight: impl Fn(f64) -> f64, trig: fn(f64) -> f64) -> f64 {
        quadrature::integrate(
            |w| bump.eval(w) * weight(w) * trig(w * t),
            1.0,
            2.0,
            1e-16,
            1e-12,
        )
        .value
            / PI
    }

    #[test]
    fn table_matches_direct_quadrature() {
        let h = PerturbationH::cached(2.87, Bump::default()).unwrap();
        let b = Bump::default();
        for &t in &[0.0, 0.3, 1.0, 2.5, 7.123, 20.0, 41.7] {
            let exact = direct(b, t, |_| 1.0, f64::cos);
            assert!((h.eval(t) - exact).abs() < 1e-12, "H({t})");
            assert!((h.eval(-t) - h.eval(t)).abs() < 1e-15);
            let dprim = direct(b, t, |w| 1.0 / w, f64::sin);
            assert!((h.primitive(t) - dprim).abs() < 1e-12, "H^(-1)({t})");
            let dd = -direct(b, t, |w| w, f64::sin);
            assert!((h.derivative(t) - dd).abs() < 1e-12, "H'({t})");
        }
    }

    #[test]
    fn certified_properties() {
        let h = PerturbationH::cached(2.87, Bump::default()).unwrap();
        assert!(h.integral.abs() < 1e-8);
        assert!(h.primitive_l1 > 0.0);
        assert!(h.spectral_leak <= 1e-10);
        // inside the band the transform reproduces the bump
        let b = Bump::default();
        for &w in &[1.2, 1.5, 1.8] {
            assert!((h.fourier(w) - b.eval(w)).abs() < 1e-9);
        }
        for i in 0..h.table_len() {
            let t = i as f64 * h.step;
            assert!(h.eval(t).abs() * (1.0 + t * t).powf(h.r) <= h.decay_constant * (1.0 + 1e-12));
        }
    }
}
