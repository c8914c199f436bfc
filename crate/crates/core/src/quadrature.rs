//! Numerical integration: adaptive Gauss-Kronrod on finite and infinite
//! intervals, plus uniform-grid trapezoid helpers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive 7-15 Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    if a > b {
        let r = integrate(f, b, a, abs_tol, rel_tol);
        return Integral {
            value: -r.value,
            ..r
        };
    }
    const MAX_SEGMENTS: usize = 4000;
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut total_err = e;
    let mut converged = false;
    while heap.len() < MAX_SEGMENTS {
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            converged = true;
            break;
        }
        let seg = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval cannot be split further in floating point
            heap.push(seg);
            break;
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid);
        let (v2, e2) = gk15(&mut f, mid, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let mut value = 0.0;
    let mut error = 0.0;
    for s in heap.iter() {
        value += s.value;
        error += s.error;
    }
    if !converged {
        converged = error <= abs_tol.max(rel_tol * value.abs());
    }
    Integral {
        value,
        error,
        converged,
    }
}

/// Integral over `[a, +inf)` through the map `x = a + t/(1-t)`.
pub fn integrate_upper<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Integral over the whole real line, split at `center`.
pub fn integrate_line<F: FnMut(f64) -> f64>(
    mut f: F,
    center: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Integral {
    let right = integrate_upper(&mut f, center, 0.5 * abs_tol, rel_tol);
    let left = integrate_upper(|x| f(2.0 * center - x), center, 0.5 * abs_tol, rel_tol);
    Integral {
        value: left.value + right.value,
        error: left.error + right.error,
        converged: left.converged && right.converged,
    }
}

/// Trapezoid weights for `count` uniform nodes with the given spacing.
pub fn trapezoid_weights(count: usize, spacing: f64) -> Vec<f64> {
    let mut w = vec![spacing; count];
    if count >= 1 {
        w[0] *= 0.5;
        w[count - 1] *= 0.5;
    }
    if count == 1 {
        w[0] = 0.0;
    }
    w
}

/// Trapezoid rule for uniformly spaced samples.
pub fn trapezoid(values: &[f64], spacing: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => spacing * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Running trapezoid integral; element `i` integrates nodes `0..=i`.
pub fn cumulative_trapezoid(values: &[f64], spacing: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * spacing * (values[i - 1] + v);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-13, 0.0);
        assert!((r.value - (20.0 - 8.0 + 4.0)).abs() < 1e-12, "{}", r.value);
        assert!(r.converged);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let a = integrate(f64::sin, 0.0, 2.0, 1e-12, 0.0).value;
        let b = integrate(f64::sin, 2.0, 0.0, 1e-12, 0.0).value;
        assert!((a + b).abs() < 1e-14);
    }

    #[test]
    fn kink_and_jump_converge() {
        let r = integrate(|x: f64| x.abs(), -1.0, 2.0, 1e-12, 0.0);
        assert!((r.value - 2.5).abs() < 1e-10);
        let r = integrate(|x| if x < 0.3 { 1.0 } else { 0.0 }, 0.0, 1.0, 1e-10, 0.0);
        assert!((r.value - 0.3).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn gaussian_over_line() {
        let r = integrate_line(|x| (-0.5 * x * x).exp(), 0.0, 1e-12, 1e-12);
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-10);
        let r = integrate_line(|x| 1.0 / (1.0 + x * x), 3.0, 1e-12, 1e-12);
        assert!((r.value - PI).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn trapezoid_helpers_agree() {
        let v: Vec<f64> = (0..11).map(|i| (i as f64 * 0.1).powi(2)).collect();
        let total = trapezoid(&v, 0.1);
        let cum = cumulative_trapezoid(&v, 0.1);
        assert!((cum[10] - total).abs() < 1e-15);
        let w = trapezoid_weights(11, 0.1);
        let dot: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((dot - total).abs() < 1e-15);
    }
}
