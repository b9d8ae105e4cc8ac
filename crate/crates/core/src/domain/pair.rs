use serde::{Deserialize, Serialize};

use crate::domain::ComplexMatrix;
use crate::error::{Error, Result};
use crate::linalg::{c, identity, max_abs, CMat};

/// A pair of orthogonal subspaces `V ⊥ W` of `C^n`, held as isometries
/// `v: C^r -> V` and `w: C^s -> W`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoPair {
    v: CMat,
    w: CMat,
}

impl OrthoPair {
    pub fn n(&self) -> usize {
        self.v.nrows()
    }

    pub fn r(&self) -> usize {
        self.v.ncols()
    }

    pub fn s(&self) -> usize {
        self.w.ncols()
    }

    pub fn v(&self) -> &CMat {
        &self.v
    }

    pub fn w(&self) -> &CMat {
        &self.w
    }

    pub fn proj_v(&self) -> CMat {
        &self.v * self.v.adjoint()
    }

    pub fn proj_w(&self) -> CMat {
        &self.w * self.w.adjoint()
    }

    /// The pair `(W, V)`.
    pub fn swapped(&self) -> OrthoPair {
        OrthoPair {
            v: self.w.clone(),
            w: self.v.clone(),
        }
    }

    /// `(qV, qW)` for a unitary `q`, re-validated.
    pub fn transformed(&self, q: &CMat, ortho_tol: f64) -> Result<OrthoPair> {
        if q.nrows() != self.n() || q.ncols() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, pair lives in C^{}",
                q.nrows(),
                q.ncols(),
                self.n()
            )));
        }
        validate_pair(&(q * &self.v), &(q * &self.w), ortho_tol)
    }

    pub fn to_file(&self) -> PairFile {
        PairFile {
            n: self.n(),
            v: ComplexMatrix::new(self.v.clone()).expect("validated pair is finite"),
            w: ComplexMatrix::new(self.w.clone()).expect("validated pair is finite"),
            columns: None,
        }
    }
}

/// Checks the isometry and orthogonality contract and returns a pair whose
/// columns are re-orthonormalized to machine precision.
pub fn validate_pair(vmap: &CMat, wmap: &CMat, ortho_tol: f64) -> Result<OrthoPair> {
    if !(ortho_tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "ortho_tol must be positive, got {ortho_tol}"
        )));
    }
    let n = vmap.nrows();
    if wmap.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "V has {} rows but W has {}",
            n,
            wmap.nrows()
        )));
    }
    let (r, s) = (vmap.ncols(), wmap.ncols());
    if r == 0 || s == 0 || r + s > n {
        return Err(Error::DimensionMismatch(format!(
            "need r >= 1, s >= 1, r + s <= n; got n={n}, r={r}, s={s}"
        )));
    }
    for m in [vmap, wmap] {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry in pair".into()));
        }
    }
    let dev_v = max_abs(&(vmap.adjoint() * vmap - identity(r)));
    let dev_w = max_abs(&(wmap.adjoint() * wmap - identity(s)));
    let deviation = dev_v.max(dev_w);
    if deviation >= ortho_tol {
        return Err(Error::NotOrthonormal {
            deviation,
            tol: ortho_tol,
        });
    }
    let cross = max_abs(&(vmap.adjoint() * wmap));
    if cross >= ortho_tol {
        return Err(Error::RangesNotOrthogonal {
            deviation: cross,
            tol: ortho_tol,
        });
    }

    let v = phase_fixed_q(vmap);
    let w_perp = wmap - &v * (v.adjoint() * wmap);
    let w = phase_fixed_q(&w_perp);
    Ok(OrthoPair { v, w })
}

/// Q factor of a thin QR with `diag(R)` made real positive, so that a nearly
/// orthonormal input is changed only at the rounding level.
fn phase_fixed_q(m: &CMat) -> CMat {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..q.ncols() {
        let d = rr[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / c(d.norm(), 0.0)
        } else {
            c(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// JSON pair file: `{"n": n, "V": <matrix>, "W": <matrix>}`.
///
/// The optional `columns` entry carries an explicit spanning system of `V`
/// (an `n x n` matrix) for operations that need a square moment system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFile {
    pub n: usize,
    #[serde(rename = "V")]
    pub v: ComplexMatrix,
    #[serde(rename = "W")]
    pub w: ComplexMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<ComplexMatrix>,
}

impl PairFile {
    pub fn validate(&self, ortho_tol: f64) -> Result<OrthoPair> {
        if self.v.rows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "declared n = {} but V has {} rows",
                self.n,
                self.v.rows()
            )));
        }
        if let Some(cols) = &self.columns {
            if cols.rows() != self.n {
                return Err(Error::DimensionMismatch(format!(
                    "declared n = {} but columns has {} rows",
                    self.n,
                    cols.rows()
                )));
            }
        }
        validate_pair(&self.v, &self.w, ortho_tol)
    }
}
