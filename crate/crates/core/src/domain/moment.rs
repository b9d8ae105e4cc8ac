use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{row_sq_norms, CMat};

/// The moment of a system of vectors: the diagonal of `v v*`, a nonnegative
/// real vector whose sum is the squared Frobenius norm of the system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MomentVector {
    values: Vec<f64>,
}

impl MomentVector {
    /// Entries within `moment_tol` below zero are clamped to zero; anything
    /// more negative is rejected.
    pub fn new(mut values: Vec<f64>, moment_tol: f64) -> Result<Self> {
        for (i, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || *v < -moment_tol {
                return Err(Error::InvalidMatrix(format!(
                    "moment entry {i} = {v} is negative"
                )));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

/// `values[i] = sum_j |v[i, j]|^2`, the diagonal of `v v*`.
pub fn hadamard_square(v: &CMat) -> MomentVector {
    MomentVector {
        values: row_sq_norms(v),
    }
}
