use serde::{Deserialize, Serialize};

use crate::domain::{ComplexMatrix, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{c, frob_norm, hermitian_defect, hermitian_part, CMat};

/// A point `(a, b)` of `Σ_r × Σ_s`: hermitian matrices with `tr(a²) = tr(b²) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    a: CMat,
    b: CMat,
}

impl SpherePoint {
    pub fn new(a: CMat, b: CMat, tol: &Tolerances) -> Result<Self> {
        for (name, m) in [("a", &a), ("b", &b)] {
            let defect = hermitian_defect(m);
            if defect > tol.hermitian_tol {
                return Err(Error::NotOnSphere(format!(
                    "{name} is not hermitian (defect {defect:.3e})"
                )));
            }
            let norm = frob_norm(m);
            if (norm * norm - 1.0).abs() > tol.sphere_tol {
                return Err(Error::NotOnSphere(format!("tr({name}²) = {}", norm * norm)));
            }
        }
        Ok(Self { a, b })
    }

    /// Hermitian parts of `a` and `b`, each scaled to unit Frobenius norm.
    pub fn normalized(a: &CMat, b: &CMat) -> Result<Self> {
        let a = unit_hermitian(a)?;
        let b = unit_hermitian(b)?;
        Ok(Self { a, b })
    }

    pub(crate) fn from_parts_unchecked(a: CMat, b: CMat) -> Self {
        Self { a, b }
    }

    pub fn a(&self) -> &CMat {
        &self.a
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn r(&self) -> usize {
        self.a.nrows()
    }

    pub fn s(&self) -> usize {
        self.b.nrows()
    }

    pub fn to_file(&self) -> SpherePointFile {
        SpherePointFile {
            a: ComplexMatrix::new(self.a.clone()).expect("finite"),
            b: ComplexMatrix::new(self.b.clone()).expect("finite"),
        }
    }
}

fn unit_hermitian(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::NotOnSphere(format!(
            "{}x{} is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let h = hermitian_part(m);
    let norm = frob_norm(&h);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::NotOnSphere("cannot normalize a zero matrix".into()));
    }
    Ok(h / c(norm, 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePointFile {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}
