use proptest::prelude::*;
use wassdeconv_core::kernel::*;
use wassdeconv_core::kernel_suite::{kernel_suite, truncation_tail};
use wassdeconv_core::quadrature;
use wassdeconv_core::{CoordinateNoise, NoiseModel};

/// Fourfold self-convolution of the box on `[-1/4, 1/4]` by Riemann sums,
/// rescaled to one at the origin.
fn box_convolution_oracle(u: f64) -> f64 {
    let n = 2000;
    let dx = 0.5 / n as f64;
    let boxed = vec![2.0; n];
    let conv = |a: &[f64], b: &[f64]| {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y * dx;
            }
        }
        out
    };
    let two = conv(&boxed, &boxed);
    let four = conv(&two, &two);
    // four[k] approximates the density at -1 + (k + 2) dx
    let at = |v: f64| {
        let s = (v + 1.0) / dx - 2.0;
        let k = s.floor() as usize;
        let t = s - k as f64;
        four[k] * (1.0 - t) + four[k + 1] * t
    };
    at(u) / at(0.0)
}

#[test]
fn order_examples() {
    assert_eq!(kernel_order(1.0).unwrap(), 4);
    assert_eq!(kernel_order(2.0).unwrap(), 4);
    assert_eq!(kernel_order(3.0).unwrap(), 6);
    assert!(kernel_order(0.5).is_err());
}

#[test]
fn density_examples() {
    let s = KernelSpec::new(1.0).unwrap();
    assert_eq!(kernel_density(&s, 0.0), s.c_p);
    assert!(kernel_density(&s, 4.0 * std::f64::consts::PI).abs() < 1e-15);
    let expected = s.c_p * (4.0 * 0.25f64.sin()).powi(4);
    assert!((kernel_density(&s, 1.0) - expected).abs() < 1e-15);
    for x in [0.3, 2.0, 7.5, 40.0] {
        assert!(kernel_density(&s, x) <= s.c_p);
    }
}

#[test]
fn ft_examples() {
    let s = KernelSpec::new(1.0).unwrap();
    assert_eq!(kernel_ft(&s, 0.0), 1.0);
    assert_eq!(kernel_ft(&s, 1.5), 0.0);
    for u in [0.1, 0.5, 0.77] {
        let oracle = box_convolution_oracle(u);
        assert!(
            (kernel_ft(&s, u) - oracle).abs() < 1e-5,
            "u={u}: {} vs {oracle}",
            kernel_ft(&s, u)
        );
    }
}

#[test]
fn normalization_by_quadrature() {
    for p in [1.0, 3.0, 5.0] {
        let s = KernelSpec::new(p).unwrap();
        let r = quadrature::integrate_line(|x| s.density(x), 0.0, 1e-12, 1e-10);
        assert!((r.value - 1.0).abs() < 1e-6, "p={p}: {}", r.value);
    }
}

#[test]
fn dirac_noise_reproduces_the_kernel() {
    let s = KernelSpec::new(2.0).unwrap();
    let noise = NoiseModel::iid(CoordinateNoise::dirac_zero(), 1).unwrap();
    let grid: Vec<f64> = (-50..=50).map(|i| i as f64 * 0.37).collect();
    for h in [0.2, 1.0] {
        let t = deconv_kernel(&s, &noise, 0, h, &grid).unwrap();
        for (x, v) in grid.iter().zip(&t.values) {
            assert!((v - s.density(*x)).abs() < 1e-6);
        }
    }
}

#[test]
fn symmetric_noise_gives_even_real_kernels() {
    let s = KernelSpec::new(1.0).unwrap();
    let grid: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.25).collect();
    for coord in [
        CoordinateNoise::gaussian(0.7).unwrap(),
        CoordinateNoise::laplace(0.5).unwrap(),
    ] {
        let noise = NoiseModel::new(vec![coord]).unwrap();
        let t = deconv_kernel(&s, &noise, 0, 0.4, &grid).unwrap();
        assert!(t.imag_residue < 1e-9);
        for i in 0..grid.len() {
            assert!((t.values[i] - t.values[grid.len() - 1 - i]).abs() < 1e-9);
        }
        assert!(t.refinement_delta(&noise).unwrap() < 1e-8);
    }
}

#[test]
fn vanishing_char_fn_is_a_singularity() {
    let s = KernelSpec::new(1.0).unwrap();
    let noise = NoiseModel::iid(CoordinateNoise::gaussian(1.0).unwrap(), 1).unwrap();
    let err = deconv_kernel(&s, &noise, 0, 0.01, &[0.0]).unwrap_err();
    assert!(
        matches!(err, wassdeconv_core::Error::DivisionSingularity { .. }),
        "{err}"
    );
}

#[test]
fn variance_terms_examples() {
    let s = KernelSpec::new(1.0).unwrap();
    let dirac = NoiseModel::iid(CoordinateNoise::dirac_zero(), 1).unwrap();
    let t = variance_bound_terms(&s, &dirac, 0, 1.0).unwrap();
    assert!((t.i - 2f64.sqrt()).abs() < 1e-10);

    let gauss = NoiseModel::iid(CoordinateNoise::gaussian(1.0).unwrap(), 1).unwrap();
    // r = e^{u^2/2}, r' = u e^{u^2/2}
    let oracle = quadrature::integrate(|u| (1.0 + u * u) * (u * u).exp(), -2.0, 2.0, 0.0, 1e-13)
        .value
        .sqrt();
    let half = variance_bound_terms(&s, &gauss, 0, 0.5).unwrap();
    assert!(
        (half.i - oracle).abs() < 1e-8 * oracle,
        "{} vs {oracle}",
        half.i
    );
    let one = variance_bound_terms(&s, &gauss, 0, 1.0).unwrap();
    assert!(one.i.is_finite() && one.j.is_finite() && half.i > one.i && half.j > one.j);
}

#[test]
fn suite_passes_beyond_m4() {
    for p in [3.0, 4.0, 6.0] {
        let r = kernel_suite(p).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}

#[test]
fn m4_transform_leak_is_truncation() {
    let r = kernel_suite(1.0).unwrap();
    for c in &r.checks {
        if c.name != "support_quadrature" {
            assert!(c.pass, "{c:?}");
        }
    }
    let leak = r.check("support_quadrature").unwrap().value;
    assert!(leak <= truncation_tail(&r.spec));
    assert_eq!(r.check("support_exact").unwrap().value, 0.0);
}

proptest! {
    #[test]
    fn ft_is_even_bounded_and_unimodal(p in 1.0f64..8.0, u in 0.0f64..1.2, v in 0.0f64..1.2) {
        let s = KernelSpec::new(p).unwrap();
        let (a, b) = (s.ft(u), s.ft(v));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(a, s.ft(-u));
        if u <= v {
            prop_assert!(a >= b - 1e-15);
        }
    }

    #[test]
    fn ft_derivatives_are_bounded(p in 1.0f64..5.0, u in -0.95f64..0.95) {
        let s = KernelSpec::new(p).unwrap();
        let d = 1e-3;
        // central differences of order ceil(p) stay finite and moderate
        let q = s.ceil_p();
        let mut coeffs = vec![1.0];
        for _ in 0..q {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (i, c) in coeffs.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c;
            }
            coeffs = next;
        }
        let diff: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * s.ft(u + d * (q as f64 / 2.0 - i as f64)))
            .sum::<f64>()
            / d.powi(q as i32);
        prop_assert!(diff.abs() < 10f64.powi(q as i32 + 2), "{diff}");
    }
}
