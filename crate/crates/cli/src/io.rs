use std::path::Path;

use anyhow::{bail, Context, Result};
use wassdeconv_core::experiments::NoiseSpec;

/// Rows of a headerless numeric CSV, all of one width.
pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .with_context(|| format!("{}:{}: `{f}` is not a number", path.display(), i + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if first != row.len() {
                bail!(
                    "{}:{}: expected {first} columns, found {}",
                    path.display(),
                    i + 1,
                    row.len()
                );
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        bail!("{} holds no data", path.display());
    }
    Ok(rows)
}

pub fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Parses the compact `kind[:param[:param]]` noise notation.
pub fn parse_noise(text: &str) -> Result<NoiseSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |i: usize| -> Result<f64> {
        parts
            .get(i)
            .with_context(|| format!("noise `{text}` is missing parameter {i}"))?
            .parse::<f64>()
            .with_context(|| format!("noise `{text}`: bad number"))
    };
    let spec = match parts[0] {
        "dirac-zero" => NoiseSpec::DiracZero,
        "gaussian" => NoiseSpec::Gaussian { sigma: num(1)? },
        "laplace" => NoiseSpec::Laplace { b: num(1)? },
        "cauchy" => NoiseSpec::Cauchy { s: num(1)? },
        "stable" => NoiseSpec::Stable { alpha: num(1)? },
        "powered-stable" => {
            let k = num(2)?;
            if k.fract() != 0.0 || k < 1.0 {
                bail!("noise `{text}`: k must be a positive integer");
            }
            NoiseSpec::PoweredStable {
                alpha: num(1)?,
                k: k as u32,
            }
        }
        other => bail!("unknown noise kind `{other}`"),
    };
    let expected = match spec {
        NoiseSpec::DiracZero => 1,
        NoiseSpec::PoweredStable { .. } => 3,
        _ => 2,
    };
    if parts.len() != expected {
        bail!("noise `{text}` takes {} parameter(s)", expected - 1);
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_notation() {
        assert_eq!(parse_noise("dirac-zero").unwrap(), NoiseSpec::DiracZero);
        assert_eq!(
            parse_noise("gaussian:0.5").unwrap(),
            NoiseSpec::Gaussian { sigma: 0.5 }
        );
        assert_eq!(
            parse_noise("powered-stable:1.5:2").unwrap(),
            NoiseSpec::PoweredStable { alpha: 1.5, k: 2 }
        );
        for bad in [
            "gaussian",
            "gaussian:1:2",
            "laplace:x",
            "powered-stable:1:2.5",
            "uniform:1",
        ] {
            assert!(parse_noise(bad).is_err(), "{bad}");
        }
    }
}
