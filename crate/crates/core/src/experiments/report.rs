use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::rate::RateStudyResult;
use crate::error::Result;

/// Locale-free shortest round-trip formatting.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes `header` and `rows` as CSV.
pub fn write_csv<W: Write>(
    out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    write_csv(File::create(path)?, header, rows)
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub rows: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
}

/// Writes `rows.csv`, `summary.csv` and `plot.csv` into `dir`.
pub fn emit_report(result: &RateStudyResult, dir: &Path) -> Result<ReportFiles> {
    std::fs::create_dir_all(dir)?;
    let files = ReportFiles {
        rows: dir.join("rows.csv"),
        summary: dir.join("summary.csv"),
        plot: dir.join("plot.csv"),
    };
    let mut rows = result.rows.clone();
    rows.sort_by_key(|r| (r.n, r.replicate));
    write_csv_file(
        &files.rows,
        &["n", "replicate", "wpp", "seconds"],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.replicate.to_string(),
                fmt_f64(r.wpp),
                fmt_f64(r.seconds),
            ]
        }),
    )?;
    write_csv_file(
        &files.summary,
        &["n", "mean", "stderr", "bandwidth"],
        result.summary.iter().map(|s| {
            vec![
                s.n.to_string(),
                fmt_f64(s.mean),
                fmt_f64(s.stderr),
                fmt_f64(s.bandwidth),
            ]
        }),
    )?;
    write_csv_file(
        &files.plot,
        &["loglog_n", "log_mean"],
        result
            .summary
            .iter()
            .filter(|s| s.mean > 0.0 && s.mean.is_finite())
            .map(|s| vec![fmt_f64((s.n as f64).ln().ln()), fmt_f64(s.mean.ln())]),
    )?;
    Ok(files)
}
