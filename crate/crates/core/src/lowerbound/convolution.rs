use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{Axis, GridDensity};

fn check_pair(f: &GridDensity, g: &GridDensity) -> Result<f64> {
    f.require_1d()?;
    g.require_1d()?;
    let (sf, sg) = (f.axis(0).spacing(), g.axis(0).spacing());
    if (sf - sg).abs() > 1e-10 * sf.max(sg) {
        return Err(Error::SpacingMismatch(sf, sg));
    }
    Ok(sf)
}

fn output_axis(f: &GridDensity, g: &GridDensity, s: f64) -> Result<Axis> {
    let n = f.len() + g.len() - 1;
    let min = f.axis(0).min + g.axis(0).min;
    Axis::new(min, min + (n - 1) as f64 * s, n)
}

/// `(f * g)(x) = int f(x - u) g(u) du` on the full support grid, by
/// zero-padded FFT.
pub fn convolve_density(f: &GridDensity, g: &GridDensity) -> Result<GridDensity> {
    let s = check_pair(f, g)?;
    let axis = output_axis(f, g, s)?;
    GridDensity::new(vec![axis], fft_convolve(f.values(), g.values(), s))
}

/// Same as [`convolve_density`] by direct summation.
pub fn convolve_direct(f: &GridDensity, g: &GridDensity) -> Result<GridDensity> {
    let s = check_pair(f, g)?;
    let axis = output_axis(f, g, s)?;
    GridDensity::new(vec![axis], direct_convolve(f.values(), g.values(), s))
}

pub(crate) fn fft_convolve(a: &[f64], b: &[f64], scale: f64) -> Vec<f64> {
    let n_out = a.len() + b.len() - 1;
    let n = n_out.next_power_of_two();
    let mut fa: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(a.get(i).copied().unwrap_or(0.0), 0.0))
        .collect();
    let mut fb: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(b.get(i).copied().unwrap_or(0.0), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    planner.plan_fft_inverse(n).process(&mut fa);
    let norm = scale / n as f64;
    fa[..n_out].iter().map(|z| z.re * norm).collect()
}

pub(crate) fn direct_convolve(a: &[f64], b: &[f64], scale: f64) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

/// Restriction of a 1-D density to the nodes of `axis`, which must lie on
/// the density's node lattice.
pub fn restrict(gd: &GridDensity, axis: Axis) -> Result<GridDensity> {
    gd.require_1d()?;
    let src = gd.axis(0);
    let s = src.spacing();
    if (axis.spacing() - s).abs() > 1e-9 * s {
        return Err(Error::SpacingMismatch(s, axis.spacing()));
    }
    let offset = (axis.min - src.min) / s;
    let start = offset.round();
    if (offset - start).abs() > 1e-6 || start < 0.0 || start as usize + axis.count > src.count {
        return Err(Error::GridCoverage(format!(
            "[{}, {}] is not a sub-lattice of [{}, {}]",
            axis.min, axis.max, src.min, src.max
        )));
    }
    let start = start as usize;
    GridDensity::new(vec![axis], gd.values()[start..start + axis.count].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_with_box_is_a_triangle() {
        let s = 1.0 / 200.0;
        let axis = Axis::new(-0.5, 0.5, 201).unwrap();
        let b = GridDensity::new(vec![axis], vec![1.0; 201]).unwrap();
        let t = convolve_density(&b, &b).unwrap();
        assert!((t.axis(0).min + 1.0).abs() < 1e-12 && (t.axis(0).max - 1.0).abs() < 1e-12);
        let peak = t.values()[200];
        // trapezoid weights make the discrete box carry one extra half-cell per side
        assert!((peak - (1.0 + s)).abs() < 1e-12, "{peak}");
        let mid = t.interpolate(&[0.5]);
        assert!((mid - 0.5).abs() < 2.0 * s);
    }

    #[test]
    fn fft_matches_direct() {
        let axis = Axis::new(-3.0, 3.0, 301).unwrap();
        let f = GridDensity::from_fn(vec![axis], |x| (-x[0] * x[0]).exp()).unwrap();
        let g = GridDensity::from_fn(vec![axis], |x| 1.0 / (1.0 + x[0] * x[0])).unwrap();
        let a = convolve_density(&f, &g).unwrap();
        let b = convolve_direct(&f, &g).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn spacing_mismatch() {
        let f = GridDensity::new(vec![Axis::new(0.0, 1.0, 11).unwrap()], vec![1.0; 11]).unwrap();
        let g = GridDensity::new(vec![Axis::new(0.0, 1.0, 21).unwrap()], vec![1.0; 21]).unwrap();
        assert!(matches!(
            convolve_density(&f, &g),
            Err(Error::SpacingMismatch(..))
        ));
    }
}
