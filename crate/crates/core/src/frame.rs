//! The frame data model: unit vectors on the sphere and ordered
//! configurations of them.

use crate::error::{Error, Result};
use crate::linalg::norm;

/// Tolerance to which constructed vectors are unit-norm.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// A point on the unit sphere of R^d, d >= 2.
///
/// Construction normalizes, so the unit-norm invariant holds to well
/// below [`UNIT_NORM_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    /// Normalize `coords` onto the sphere. Rejects d < 2 and (near-)zero input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        let n = norm(&coords);
        if !n.is_finite() || n < 1e-300 {
            return Err(Error::ZeroNorm(n));
        }
        let coords = coords.into_iter().map(|c| c / n).collect();
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Flip the sign of every coordinate (same line, opposite representative).
    pub fn negated(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

}

/// An ordered list of N unit vectors in R^d; the frame matrix X has one
/// column per vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig {
    d: usize,
    vectors: Vec<UnitVector>,
}

impl FrameConfig {
    pub fn new(d: usize, vectors: Vec<UnitVector>) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        if vectors.is_empty() {
            return Err(Error::TooFewVectors { needed: 1, got: 0 });
        }
        for v in &vectors {
            if v.dim() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: v.dim(),
                });
            }
        }
        Ok(Self { d, vectors })
    }

    /// Build from raw columns, normalizing each onto the sphere.
    pub fn from_columns(d: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        let vectors = columns
            .into_iter()
            .map(UnitVector::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, vectors)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[UnitVector] {
        &self.vectors
    }

    pub fn column(&self, i: usize) -> &UnitVector {
        &self.vectors[i]
    }

    /// Coordinates in vector-major order (all d coordinates of vector 0,
    /// then vector 1, ...), the order used by packing files.
    pub fn flattened(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.d * self.vectors.len());
        for v in &self.vectors {
            out.extend_from_slice(v.coords());
        }
        out
    }

    /// The frame operator XX^T as a d x d matrix.
    pub fn frame_operator(&self) -> Vec<Vec<f64>> {
        let d = self.d;
        let mut op = vec![vec![0.0; d]; d];
        for v in &self.vectors {
            let c = v.coords();
            for i in 0..d {
                for j in 0..d {
                    op[i][j] += c[i] * c[j];
                }
            }
        }
        op
    }

    /// Largest deviation of any column norm from 1.
    pub fn max_norm_deviation(&self) -> f64 {
        self.vectors
            .iter()
            .map(|v| (norm(v.coords()) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
