use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wassdeconv_core::estimator::*;
use wassdeconv_core::experiments::{run_fourier_study, FourierStudyConfig};
use wassdeconv_core::kernel::KernelSpec;
use wassdeconv_core::*;

fn dirac(d: usize) -> NoiseModel {
    NoiseModel::iid(CoordinateNoise::dirac_zero(), d).unwrap()
}

#[test]
fn bandwidth_rule_examples() {
    let n = |x: f64| x.exp().round() as usize;
    // e^8 rounds to 2981; compare with the real-valued rule
    assert!((bandwidth_rule_real(1, 2.0, 2.0, 8f64.exp()).unwrap() - 0.5).abs() < 1e-12);
    assert!((bandwidth_rule_real(2, 2.0, 2.0, 8f64.exp()).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((bandwidth_rule_real(1, 1.0, 1.0, 4f64.exp()).unwrap() - 1.0).abs() < 1e-12);
    assert!((bandwidth_rule(1, 2.0, 2.0, n(8.0)).unwrap() - 0.5).abs() < 1e-4);
    assert!(bandwidth_rule(1, 2.0, 2.0, 2).is_err());
    assert!(bandwidth_rule(1, 0.0, 2.0, 100).is_err());
}

#[test]
fn dirac_noise_gives_the_plain_kernel_estimate() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pts: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
    let s = SampleBatch::new(pts.clone(), 1).unwrap();
    let h = 0.4;
    let axis = Axis::new(-12.0, 12.0, 241).unwrap();
    let cfg = EstimatorConfig::new(2.0, vec![h], vec![axis], None).unwrap();
    let est = estimate_raw(&s, &dirac(1), &cfg).unwrap();
    let k = KernelSpec::new(2.0).unwrap();
    for (i, v) in est.density.values().iter().enumerate() {
        let x = axis.node(i);
        let kde = pts.iter().map(|y| k.density((x - y) / h) / h).sum::<f64>() / pts.len() as f64;
        assert!((v - kde).abs() < 1e-6 * (1.0 + kde.abs()), "x={x}");
    }
}

#[test]
fn scaling_equivariance_with_dirac_noise() {
    let pts = vec![-0.7, 0.1, 0.4, 1.3];
    let (h, c) = (0.3, 2.5);
    let axis = Axis::new(-8.0, 9.0, 171).unwrap();
    let scaled_axis = Axis::new(c * axis.min, c * axis.max, axis.count).unwrap();
    let a = estimate_raw(
        &SampleBatch::new(pts.clone(), 1).unwrap(),
        &dirac(1),
        &EstimatorConfig::new(1.0, vec![h], vec![axis], None).unwrap(),
    )
    .unwrap();
    let b = estimate_raw(
        &SampleBatch::new(pts.iter().map(|x| c * x).collect(), 1).unwrap(),
        &dirac(1),
        &EstimatorConfig::new(1.0, vec![c * h], vec![scaled_axis], None).unwrap(),
    )
    .unwrap();
    for (u, v) in a.density.values().iter().zip(b.density.values()) {
        assert!((u / c - v).abs() <= 1e-9 * (1.0 + u.abs()), "{u} vs {v}");
    }
}

#[test]
fn undersized_grid_is_rejected() {
    let s = SampleBatch::new(vec![0.0, 3.0], 1).unwrap();
    let cfg = EstimatorConfig::new(
        1.0,
        vec![0.5],
        vec![Axis::new(-1.0, 4.0, 51).unwrap()],
        None,
    )
    .unwrap();
    assert!(matches!(
        estimate_raw(&s, &dirac(1), &cfg),
        Err(Error::GridCoverage(_))
    ));
    assert!(EstimatorConfig::new(
        1.0,
        vec![1.5],
        vec![Axis::new(-1.0, 4.0, 51).unwrap()],
        None
    )
    .is_err());
    let auto = EstimatorConfig::auto(&s, 1.0, vec![0.5], None).unwrap();
    let margin = grid_margin(1.0, 0.5).unwrap();
    assert!(
        (auto.grid[0].min + margin).abs() < 1e-12
            && (auto.grid[0].max - 3.0 - margin).abs() < 1e-12
    );
}

#[test]
fn identity_decorrelation_changes_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pts: Vec<f64> = (0..400).map(|_| rng.random_range(-1.0..1.0)).collect();
    let s = SampleBatch::new(pts, 2).unwrap();
    let noise = NoiseModel::iid(CoordinateNoise::gaussian(0.3).unwrap(), 2).unwrap();
    let plain = EstimatorConfig::auto(&s, 1.0, vec![0.5, 0.5], Some(48)).unwrap();
    let mut with_id = plain.clone();
    with_id.decorrelation = Some(LinearMap::identity(2));
    let direct = positive_normalize(&estimate_raw(&s, &noise, &plain).unwrap().density).unwrap();
    let mapped = estimate_measure(&s, &noise, &with_id).unwrap().density;
    for (a, b) in direct.values().iter().zip(mapped.values()) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn diagonal_map_of_a_single_point() {
    let s = SampleBatch::new(vec![0.0, 0.0], 2).unwrap();
    let map = LinearMap::diagonal(&[2.0, 1.0]).unwrap();
    let cfg = EstimatorConfig::auto_decorrelated(&s, 1.0, vec![0.5, 0.5], Some(161), map).unwrap();
    let est = estimate_measure(&s, &dirac(2), &cfg).unwrap();
    assert!((est.density.integral() - 1.0).abs() < 1e-4);
    // the first marginal is the kernel stretched by 1/2
    let first = est.density.marginal(0).unwrap();
    let second = est.density.marginal(1).unwrap();
    let spread = |g: &GridDensity| g.integrate_with(|x, v| x[0] * x[0] * v);
    assert!(spread(&first) < 0.5 * spread(&second));
}

#[test]
fn rotated_frame_estimate_is_the_rotated_kernel() {
    let s = SampleBatch::new(vec![0.0, 0.0], 2).unwrap();
    let h = 0.6;
    let rot = LinearMap::rotation(std::f64::consts::FRAC_PI_4);
    let cfg =
        EstimatorConfig::auto_decorrelated(&s, 1.0, vec![h, h], Some(129), rot.clone()).unwrap();
    let est = estimate_measure(&s, &dirac(2), &cfg).unwrap().density;
    let k = KernelSpec::new(1.0).unwrap();
    let mut z = [0.0; 2];
    let exact = GridDensity::from_fn(cfg.grid.clone(), |x| {
        rot.apply_point(x, &mut z);
        (k.density(z[0] / h) * k.density(z[1] / h)).max(0.0)
    })
    .unwrap();
    let scale = exact.integral();
    let peak = exact.values().iter().fold(0.0f64, |m, v| m.max(*v)) / scale;
    for (a, b) in est.values().iter().zip(exact.values()) {
        assert!((a - b / scale).abs() < 0.02 * peak, "{a} vs {}", b / scale);
    }
    // the axis-aligned product kernel is a different function
    let mut plain = cfg.clone();
    plain.decorrelation = None;
    let aligned = estimate_measure(&s, &dirac(2), &plain).unwrap().density;
    assert!(wp_grid(&est, &aligned, 1.0).unwrap() > 0.0);
}

#[test]
fn decorrelation_inequality_on_quantized_outputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let truth = DiscreteMeasure::uniform(vec![-1.0, 0.0, 1.0, 0.5], 2).unwrap();
    let noise = NoiseModel::iid(CoordinateNoise::gaussian(0.3).unwrap(), 2).unwrap();
    for _ in 0..5 {
        let a = loop {
            let rows: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..2).map(|_| rng.random_range(-1.5..1.5)).collect())
                .collect();
            if let Ok(m) = LinearMap::from_rows(&rows) {
                if m.det_abs() > 0.3 {
                    break m;
                }
            }
        };
        // latent points, then noise independent in the A-frame
        let ainv = a.inverse();
        let n = 300;
        let mut pts = Vec::with_capacity(2 * n);
        let eta = sample_noise(&noise, n, rng.random()).unwrap();
        let mut e = [0.0; 2];
        for i in 0..n {
            ainv.apply_point(eta.row(i), &mut e);
            let x = truth.point(i % truth.len());
            pts.extend([x[0] + e[0], x[1] + e[1]]);
        }
        let y = SampleBatch::new(pts, 2).unwrap();
        let z = apply_linear(&a, &y).unwrap();
        let cfg_a = EstimatorConfig::auto(&z, 1.0, vec![0.6, 0.6], Some(40)).unwrap();
        let g_a = estimate_measure(&z, &noise, &cfg_a).unwrap().density;
        let q_a = quantize(&g_a, 300).unwrap();
        let truth_a = truth.map_points(2, |x, out| a.apply_point(x, out)).unwrap();
        let q = q_a
            .map_points(2, |x, out| ainv.apply_point(x, out))
            .unwrap();
        let rhs = wp_discrete(&q_a, &truth_a, 1.0).unwrap().cost_p;
        let lhs = wp_discrete(&q, &truth, 1.0).unwrap().cost_p;
        assert!(
            lhs <= a.inv_op_norm() * rhs + 1e-6,
            "{lhs} vs {} * {rhs}",
            a.inv_op_norm()
        );
    }
}

#[test]
fn fourier_transform_is_unbiased_small() {
    let mut cfg = FourierStudyConfig::two_point_default();
    cfg.n = 2000;
    cfg.replicates = 20;
    cfg.half_width = 30.0;
    cfg.nodes = 801;
    // k*(h t) vanishes at t = 2 for this n, leaving only the grid's roundoff
    cfg.t_list = vec![0.5, 1.0];
    let s = run_fourier_study(&cfg).unwrap();
    for r in &s.rows {
        assert!(r.z_score() <= 3.0, "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn positive_normalize_is_a_projection(vals in proptest::collection::vec(-1.0f64..3.0, 3..40)) {
        prop_assume!(vals.iter().any(|v| *v > 0.1));
        let axis = Axis::new(0.0, 1.0, vals.len()).unwrap();
        let raw = GridDensity::new(vec![axis], vals).unwrap();
        let g = positive_normalize(&raw).unwrap();
        prop_assert!(g.values().iter().all(|v| *v >= 0.0));
        prop_assert!((g.integral() - 1.0).abs() < 1e-8);
        let twice = positive_normalize(&g).unwrap();
        for (a, b) in g.values().iter().zip(twice.values()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
