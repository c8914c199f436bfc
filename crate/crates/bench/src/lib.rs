//! Shared fixtures for the benchmarks.

use wassdeconv_core::{DiscreteMeasure, SampleBatch};

/// Deterministic pseudo-random points in `[-1, 1)^d` from a linear
/// congruential sequence, so fixtures need no RNG dependency.
pub fn points(count: usize, dim: usize, seed: u64) -> Vec<f64> {
    let mut state = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    (0..count * dim)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

pub fn samples(n: usize, dim: usize, seed: u64) -> SampleBatch {
    SampleBatch::new(points(n, dim, seed), dim).expect("fixture dimensions are consistent")
}

pub fn uniform_measure(m: usize, dim: usize, seed: u64) -> DiscreteMeasure {
    DiscreteMeasure::uniform(points(m, dim, seed), dim).expect("fixture dimensions are consistent")
}
