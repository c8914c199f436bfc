//! Deconvolution of noisy multivariate samples under Wasserstein metrics.
//!
//! Observations follow `Y = X + eps` with a known noise law. The crate
//! estimates the law of `X` with a sinc-power deconvolution kernel,
//! measures the error in `W_p`, and computes the quantities behind the
//! matching lower bound (perturbed density families, chi-square decay).

pub mod error;
pub mod estimator;
pub mod experiments;
pub mod grid;
pub mod interp;
pub mod kernel;
pub mod kernel_suite;
pub mod lowerbound;
pub mod measures;
pub mod quadrature;
pub mod wasserstein;

pub use error::{Error, Result};
pub use estimator::{
    bandwidth_rule, estimate_measure, estimate_raw, positive_normalize, Estimate, EstimatorConfig,
};
pub use grid::{Axis, GridDensity};
pub use measures::{
    apply_linear, char_fn_eval, moment_functional, sample_noise, CoordinateNoise, LinearMap,
    MomentBound, MomentInput, NoiseKind, NoiseModel, SampleBatch, Smoothness,
};
pub use wasserstein::{
    quantize, w1_cdf_1d, wp_discrete, wp_grid, wp_quantile_1d, DiscreteMeasure, Measure1d,
    TransportPlan,
};
