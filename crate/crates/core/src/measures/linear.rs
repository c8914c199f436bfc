use nalgebra::DMatrix;

use super::sample::SampleBatch;
use crate::error::{invalid, Error, Result};

/// Invertible linear map `A` together with its inverse and norms.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    det_abs: f64,
    op_norm: f64,
    inv_op_norm: f64,
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(invalid(format!(
                "map must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(invalid("map has non-finite entries"));
        }
        let det_abs = matrix.determinant().abs();
        let inverse = matrix
            .clone()
            .try_inverse()
            .filter(|_| det_abs > 0.0)
            .ok_or_else(|| invalid("map is singular"))?;
        let op_norm = largest_singular_value(&matrix);
        let inv_op_norm = largest_singular_value(&inverse);
        Ok(Self {
            matrix,
            inverse,
            det_abs,
            op_norm,
            inv_op_norm,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(invalid("map rows must form a square matrix"));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn identity(d: usize) -> Self {
        Self::new(DMatrix::identity(d, d)).expect("identity is invertible")
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(diag),
        ))
    }

    /// Planar rotation by `angle` radians.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(DMatrix::from_row_slice(2, 2, &[c, -s, s, c])).expect("rotations are invertible")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse_matrix(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn det_abs(&self) -> f64 {
        self.det_abs
    }

    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    pub fn inv_op_norm(&self) -> f64 {
        self.inv_op_norm
    }

    pub fn inverse(&self) -> LinearMap {
        LinearMap {
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
            det_abs: 1.0 / self.det_abs,
            op_norm: self.inv_op_norm,
            inv_op_norm: self.op_norm,
        }
    }

    pub fn transpose(&self) -> LinearMap {
        LinearMap::new(self.matrix.transpose())
            .expect("transpose of an invertible map is invertible")
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        (&self.matrix - DMatrix::identity(self.dim(), self.dim()))
            .abs()
            .max()
            <= tol
    }

    /// `A x` written into `out`.
    #[inline]
    pub fn apply_point(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += self.matrix[(i, j)] * x[j];
            }
            out[i] = acc;
        }
    }
}

fn largest_singular_value(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// `{A Y_i}` for every row of the batch.
pub fn apply_linear(map: &LinearMap, batch: &SampleBatch) -> Result<SampleBatch> {
    let d = map.dim();
    if batch.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: batch.dim(),
        });
    }
    let mut points = vec![0.0; batch.as_slice().len()];
    for (row, out) in batch.rows().zip(points.chunks_exact_mut(d)) {
        map.apply_point(row, out);
    }
    SampleBatch::new(points, d)
}
