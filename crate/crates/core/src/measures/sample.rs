use crate::error::{invalid, Error, Result};

/// An `n x d` batch of observations stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    points: Vec<f64>,
    dim: usize,
}

impl SampleBatch {
    pub fn new(points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("sample dimension must be at least 1"));
        }
        if points.is_empty() || points.len() % dim != 0 {
            return Err(invalid(format!(
                "{} values cannot form a non-empty batch of dimension {dim}",
                points.len()
            )));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "non-finite entry at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self { points, dim })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Self::new(rows.concat(), dim)
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().skip(j).step_by(self.dim).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    /// Componentwise sum of two equally shaped batches (`Y = X + eps`).
    pub fn add(&self, other: &SampleBatch) -> Result<SampleBatch> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if self.len() != other.len() {
            return Err(invalid(format!(
                "batch sizes differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let points = self
            .points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SampleBatch {
            points,
            dim: self.dim,
        })
    }

    /// Per-coordinate (min, max).
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|j| {
                self.column(j)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    })
            })
            .collect()
    }
}
