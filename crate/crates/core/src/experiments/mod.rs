//! Monte Carlo rate studies, the Fourier unbiasedness check, the lower-bound tracking study and CSV reports.

mod config;
mod fourier;
mod lower;
mod rate;
mod report;
mod truth;

pub use config::{GridSpec, LowerBoundStudyConfig, NoiseSpec, RateStudyConfig, TruthSpec};
pub use fourier::{
    emit_fourier_report, run_fourier_study, FourierRow, FourierStudy, FourierStudyConfig,
};
pub use lower::{run_lowerbound_study, LowerBoundRow, LowerBoundStudy};
pub use rate::{
    cell_seed, run_rate_study, study_bandwidth, CellFailure, RateRow, RateStudyResult, SummaryRow,
};
pub use report::{emit_report, fmt_f64, write_csv, write_csv_file, ReportFiles};
