//! Constructions behind the minimax lower bound: the heavy-tailed base
//! density, band-limited perturbations, chi-square divergence after
//! convolution with the noise, and checks on stable-type noise.

mod base;
mod chi2;
mod convolution;
mod decay;
mod family;
mod perturbation;
mod schedule;
mod stable_checks;

pub use base::{f0r_eval, BasePowerDensity};
pub use chi2::{
    chi2_divergence, hellinger_affinity, le_cam_bound, le_cam_from_chi2, min_affinity, LeCamBound,
};
pub use convolution::{convolve_density, convolve_direct, restrict};
pub use decay::{
    chi2_decay_study, least_squares, shared_axis, tail_condition_check, Chi2Setup, DecayRow,
    DecayStudy, DecayStudyConfig, TailRow, TailTable,
};
pub use family::{
    envelope_constant, f_theta_eval, moment_check_ftheta, MomentCheck, PerturbationFamily,
};
pub use perturbation::{build_h, Bump, PerturbationH};
pub use schedule::{default_kappas, default_window, rpkappa_window, schedule, RWindow, Schedule};
pub use stable_checks::{
    verify_r_derivative_growth, verify_stable_convolution, DirectPoweredTable, RGrowthTable,
    StableSandwich,
};
