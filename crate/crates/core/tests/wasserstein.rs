use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use wassdeconv_core::wasserstein::{
    quantize, w1_cdf_1d, wp_discrete, wp_grid, wp_quantile_1d, DiscreteMeasure,
};
use wassdeconv_core::{Axis, GridDensity, LinearMap};

fn gaussian_grid(mean: f64, axis: Axis) -> GridDensity {
    let g = GridDensity::from_fn(vec![axis], |x| (-(x[0] - mean).powi(2) / 2.0).exp()).unwrap();
    let total = g.integral();
    GridDensity::normalized_from(
        vec![axis],
        g.values().iter().map(|v| v / total).collect(),
        1e-12,
    )
    .unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_force_assignment(x: &[Vec<f64>], y: &[Vec<f64>], p: f64) -> f64 {
    let n = x.len();
    permutations(n)
        .iter()
        .map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(i, &j)| {
                    x[i].iter()
                        .zip(&y[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                        .powf(p)
                })
                .sum::<f64>()
                / n as f64
        })
        .fold(f64::INFINITY, f64::min)
}

fn flat(points: &[Vec<f64>]) -> Vec<f64> {
    points.iter().flatten().copied().collect()
}

#[test]
fn cdf_examples() {
    let step = |a: f64| move |x: f64| if x >= a { 1.0 } else { 0.0 };
    let unif = |a: f64| move |x: f64| (x - a).clamp(0.0, 1.0);
    assert_eq!(w1_cdf_1d(unif(0.0), unif(0.0), (-1.0, 2.0)).unwrap(), 0.0);
    assert!((w1_cdf_1d(step(0.0), step(2.0), (-1.0, 3.0)).unwrap() - 2.0).abs() < 1e-9);
    assert!((w1_cdf_1d(unif(0.0), unif(0.3), (-1.0, 2.0)).unwrap() - 0.3).abs() < 1e-10);
    assert!(w1_cdf_1d(unif(0.0), unif(0.3), (0.5, 2.0)).is_err());
}

#[test]
fn quantile_examples() {
    let d0 = DiscreteMeasure::dirac(&[0.0]);
    let d3 = DiscreteMeasure::dirac(&[3.0]);
    assert_eq!(wp_quantile_1d(&d0, &d0, 2.0).unwrap(), 0.0);
    assert!((wp_quantile_1d(&d0, &d3, 2.0).unwrap() - 3.0).abs() < 1e-15);
    let a = DiscreteMeasure::uniform(vec![0.0, 1.0], 1).unwrap();
    let b = DiscreteMeasure::uniform(vec![0.0, 2.0], 1).unwrap();
    let w = wp_quantile_1d(&a, &b, 2.0).unwrap();
    // both vertices of the 2x2 polytope: identity pairing costs 1/2, swap costs 5/2
    let brute = (0.5f64 * 1.0).min(0.5 * (4.0 + 1.0)).sqrt();
    assert!((w - brute).abs() < 1e-15);
    assert!((w - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn quantile_matches_cdf_route_for_p1() {
    let axis = Axis::new(-6.0, 7.0, 400).unwrap();
    let a = gaussian_grid(0.0, axis);
    let b = gaussian_grid(0.7, axis);
    let q = wp_quantile_1d(&a, &b, 1.0).unwrap();
    let c = w1_cdf_1d(|x| a.cdf(x).unwrap(), |x| b.cdf(x).unwrap(), (-6.0, 7.0)).unwrap();
    assert!((q - c).abs() < 1e-8, "{q} vs {c}");
    let da = DiscreteMeasure::new(vec![0.0, 1.0, 4.0], 1, vec![0.2, 0.5, 0.3]).unwrap();
    let cdf = |x: f64| {
        if x < 0.0 {
            0.0
        } else if x < 1.0 {
            0.2
        } else if x < 4.0 {
            0.7
        } else {
            1.0
        }
    };
    let q = wp_quantile_1d(&da, &a, 1.0).unwrap();
    let c = w1_cdf_1d(cdf, |x| a.cdf(x).unwrap(), (-6.0, 7.0)).unwrap();
    assert!((q - c).abs() < 1e-8, "{q} vs {c}");
}

#[test]
fn discrete_examples() {
    let m = DiscreteMeasure::uniform(vec![0.0, 0.0, 1.0, 2.0, -1.0, 3.0], 2).unwrap();
    let plan = wp_discrete(&m, &m, 2.0).unwrap();
    assert_eq!(plan.cost_p, 0.0);
    assert!(plan.coupling.iter().all(|&(i, j, _)| i == j));
    let a = DiscreteMeasure::dirac(&[0.0, 0.0]);
    let b = DiscreteMeasure::dirac(&[3.0, 4.0]);
    assert!((wp_discrete(&a, &b, 1.0).unwrap().cost_p - 5.0).abs() < 1e-15);
}

#[test]
fn solver_matches_permutation_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..60 {
        let n = 2 + trial % 5;
        let d = 1 + trial % 3;
        let p = [1.0, 1.5, 2.0, 3.0][trial % 4];
        let mut pts = |k: usize| -> Vec<Vec<f64>> {
            let mut out: Vec<Vec<f64>> = Vec::new();
            while out.len() < k {
                let v: Vec<f64> = (0..d)
                    .map(|_| f64::from(rng.random_range(-5i32..=5)))
                    .collect();
                if !out.contains(&v) {
                    out.push(v);
                }
            }
            out
        };
        let x = pts(n);
        let y = pts(n);
        let mu = DiscreteMeasure::uniform(flat(&x), d).unwrap();
        let nu = DiscreteMeasure::uniform(flat(&y), d).unwrap();
        let cost = wp_discrete(&mu, &nu, p).unwrap().cost_p;
        let brute = brute_force_assignment(&x, &y, p);
        assert!(
            (cost - brute).abs() < 1e-10,
            "trial {trial}: {cost} vs {brute}"
        );
    }
}

#[test]
fn solver_is_deterministic_and_feasible_on_medium_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = 300;
    let x: Vec<f64> = (0..2 * m).map(|_| rng.random::<f64>()).collect();
    let y: Vec<f64> = (0..2 * m).map(|_| rng.random::<f64>() + 0.2).collect();
    let wx: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let wy: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let mu = DiscreteMeasure::normalized(x, 2, wx).unwrap();
    let nu = DiscreteMeasure::normalized(y, 2, wy).unwrap();
    let a = wp_discrete(&mu, &nu, 2.0).unwrap();
    let b = wp_discrete(&mu, &nu, 2.0).unwrap();
    assert_eq!(a.coupling, b.coupling);
    assert_eq!(a.cost_p.to_bits(), b.cost_p.to_bits());
    for (r, w) in a.row_sums().iter().zip(mu.weights()) {
        assert!((r - w).abs() < 1e-8);
    }
    for (c, w) in a.column_sums().iter().zip(nu.weights()) {
        assert!((c - w).abs() < 1e-8);
    }
    let recomputed: f64 = a
        .coupling
        .iter()
        .map(|&(i, j, w)| {
            w * mu
                .point(i)
                .iter()
                .zip(nu.point(j))
                .map(|(s, t)| (s - t) * (s - t))
                .sum::<f64>()
        })
        .sum();
    assert!((recomputed - a.cost_p).abs() < 1e-10);
    assert!(a.coupling.iter().all(|e| e.2 >= 0.0));
}

#[test]
fn solver_handles_the_default_atom_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = 2000;
    let x: Vec<f64> = (0..2 * m).map(|_| rng.random::<f64>() * 4.0).collect();
    let y: Vec<f64> = (0..2 * m)
        .map(|_| rng.random::<f64>() * 4.0 + 0.5)
        .collect();
    let mu = DiscreteMeasure::uniform(x, 2).unwrap();
    let nu = DiscreteMeasure::uniform(y, 2).unwrap();
    let start = std::time::Instant::now();
    let plan = wp_discrete(&mu, &nu, 1.0).unwrap();
    assert!(
        start.elapsed().as_secs_f64() < 120.0,
        "{:?}",
        start.elapsed()
    );
    // shifting by (0.5, 0.5) lower-bounds the cost through the mean displacement
    assert!(plan.cost_p >= 0.5 * 2f64.sqrt() - 0.05);
}

#[test]
fn quantize_examples() {
    let axis = Axis::new(0.0, 1.0, 2).unwrap();
    let g = GridDensity::normalized_from(vec![axis], vec![1.0, 1.0], 1e-12).unwrap();
    let q = quantize(&g, 100).unwrap();
    assert_eq!(q.len(), 1);
    assert_eq!(q.weights(), &[1.0]);

    let sym = Axis::new(-3.0, 3.0, 61).unwrap();
    let s = gaussian_grid(0.0, sym);
    let q = quantize(&s, 1000).unwrap();
    let n = q.len();
    for i in 0..n / 2 {
        assert!((q.point(i)[0] + q.point(n - 1 - i)[0]).abs() < 1e-12);
        assert!((q.weights()[i] - q.weights()[n - 1 - i]).abs() < 1e-12);
    }

    let axis = Axis::new(-6.0, 6.0, 256).unwrap();
    let g = gaussian_grid(0.0, axis);
    let q = quantize(&g, 10_000).unwrap();
    // exact Gaussian quantiles on a fine midpoint rule in u
    let normal = Normal::standard();
    let k = 200_000;
    let fine: Vec<f64> = (0..k)
        .map(|i| normal.inverse_cdf((i as f64 + 0.5) / k as f64))
        .collect();
    let truth = DiscreteMeasure::uniform(fine, 1).unwrap();
    let w = wp_quantile_1d(&q, &truth, 2.0).unwrap();
    assert!(w < 2.0 * axis.spacing(), "{w}");

    let axis2 = Axis::new(-1.0, 1.0, 41).unwrap();
    let g2 = GridDensity::from_fn(vec![axis2, axis2], |x| 1.0 + 0.5 * x[0] * x[1]).unwrap();
    let total = g2.integral();
    let g2 = GridDensity::normalized_from(
        vec![axis2, axis2],
        g2.values().iter().map(|v| v / total).collect(),
        1e-12,
    )
    .unwrap();
    let coarse = quantize(&g2, 100).unwrap();
    assert!(coarse.len() <= 100);
    assert!((coarse.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn grid_examples() {
    let axis = Axis::new(-8.0, 9.0, 341).unwrap();
    let a = gaussian_grid(0.0, axis);
    assert_eq!(wp_grid(&a, &a, 2.0).unwrap(), 0.0);
    let s = axis.spacing();
    let mut shifted = vec![0.0; axis.count];
    shifted[1..].copy_from_slice(&a.values()[..axis.count - 1]);
    let b = GridDensity::normalized_from(vec![axis], shifted, 1e-9).unwrap();
    assert!((wp_grid(&a, &b, 1.0).unwrap() - s).abs() < 1e-8);
    let c = gaussian_grid(1.0, axis);
    assert!((wp_grid(&a, &c, 1.0).unwrap() - 1.0).abs() < 2.0 * s);
}

#[test]
fn linear_maps_scale_w1() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let m = 6;
        let x: Vec<f64> = (0..2 * m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = (0..2 * m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mu = DiscreteMeasure::uniform(x, 2).unwrap();
        let nu = DiscreteMeasure::uniform(y, 2).unwrap();
        let base = wp_discrete(&mu, &nu, 1.0).unwrap().cost_p;
        let a = LinearMap::from_rows(&[
            vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
            vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)],
        ])
        .unwrap();
        let apply = |m: &DiscreteMeasure| m.map_points(2, |p, out| a.apply_point(p, out)).unwrap();
        let mapped = wp_discrete(&apply(&mu), &apply(&nu), 1.0).unwrap().cost_p;
        assert!(mapped <= a.op_norm() * base + 1e-8);
        let r = LinearMap::rotation(rng.random_range(0.0..6.0));
        let rot = |m: &DiscreteMeasure| m.map_points(2, |p, out| r.apply_point(p, out)).unwrap();
        let rotated = wp_discrete(&rot(&mu), &rot(&nu), 1.0).unwrap().cost_p;
        assert!((rotated - base).abs() < 1e-8);
    }
}

fn measure_strategy(d: usize) -> impl Strategy<Value = DiscreteMeasure> {
    (1usize..=10)
        .prop_flat_map(move |m| {
            (
                prop::collection::vec(-4i32..=4, m * d),
                prop::collection::vec(1u32..=20, m),
            )
        })
        .prop_map(move |(pts, w)| {
            let support = pts.into_iter().map(|v| f64::from(v) * 0.5).collect();
            DiscreteMeasure::normalized(support, d, w.into_iter().map(f64::from).collect()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn metric_axioms(a in measure_strategy(2), b in measure_strategy(2), c in measure_strategy(2), p in 1.0f64..3.0) {
        let w = |x: &DiscreteMeasure, y: &DiscreteMeasure| wp_discrete(x, y, p).unwrap().distance();
        let (ab, ba, bc, ac) = (w(&a, &b), w(&b, &a), w(&b, &c), w(&a, &c));
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!(ac <= ab + bc + 1e-8);
        prop_assert_eq!(w(&a, &a), 0.0);
        prop_assert_eq!(ab == 0.0, a == b);
        prop_assert!(wp_discrete(&a, &b, 1.0).unwrap().distance() <= ab + 1e-9);
    }

    #[test]
    fn marginal_projection_lower_bound(a in measure_strategy(2), b in measure_strategy(2)) {
        let full = wp_discrete(&a, &b, 1.0).unwrap().cost_p;
        let proj = wp_quantile_1d(&a.marginal(0).unwrap(), &b.marginal(0).unwrap(), 1.0).unwrap();
        prop_assert!(proj <= full + 1e-9);
        let proj_ot = wp_discrete(&a.marginal(0).unwrap(), &b.marginal(0).unwrap(), 1.0).unwrap().cost_p;
        prop_assert!((proj - proj_ot).abs() < 1e-9);
    }

    #[test]
    fn one_dimensional_solver_agrees_with_quantiles(a in measure_strategy(1), b in measure_strategy(1), p in 1.0f64..3.0) {
        let ot = wp_discrete(&a, &b, p).unwrap().cost_p;
        let q = wp_quantile_1d(&a, &b, p).unwrap().powf(p);
        prop_assert!((ot - q).abs() < 1e-9 * (1.0 + q));
    }
}
