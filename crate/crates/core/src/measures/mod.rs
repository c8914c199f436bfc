//! Probability measures, noise laws with known characteristic functions,
//! decorrelating linear maps and the moment functional.

mod linear;
mod moment;
mod noise;
mod sample;
pub mod stable;

pub use linear::{apply_linear, LinearMap};
pub use moment::{moment_functional, MomentBound, MomentInput, MomentValue};
pub(crate) use noise::sample_noise_with;
pub use noise::{
    char_fn_eval, sample_noise, CharFnTable, CoordinateNoise, NoiseKind, NoiseModel, Smoothness,
};
pub use sample::SampleBatch;
