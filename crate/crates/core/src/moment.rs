//! Moment algebra: same-moment orthogonalization of a system of vectors and
//! the square linear-system certificate that a pair is a support.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domain::hadamard_square;
use crate::error::{Error, Result};
use crate::linalg::{c, frob_norm, left_svd, real_det_solve, real_lstsq, CMat, RVec};

/// Singular values below `SVD_RANK_TOL * s_max` count as zero.
pub const SVD_RANK_TOL: f64 = 1e-11;

/// Returns the columns `s_k u^k` of the SVD `v = u s x*` for the nonzero
/// singular values. They are mutually orthogonal, span the column space of
/// `v`, and have exactly the moment of `v`.
pub fn orthogonalize_same_moment(v: &CMat) -> Result<CMat> {
    if v.is_empty() {
        return Err(Error::ZeroInput);
    }
    let (u, s) = left_svd(v);
    let smax = s.first().copied().unwrap_or(0.0);
    if !(smax > 0.0) || !smax.is_finite() {
        return Err(Error::ZeroInput);
    }
    let kept: Vec<usize> = (0..s.len())
        .filter(|&k| s[k] > SVD_RANK_TOL * smax)
        .collect();
    let mut out = CMat::zeros(v.nrows(), kept.len());
    for (dst, &k) in kept.iter().enumerate() {
        out.set_column(dst, &(u.column(k) * c(s[k], 0.0)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateConfig {
    /// The determinant threshold is `det_tol_per_dim * n`.
    pub det_tol_per_dim: f64,
    pub cert_tol: f64,
}

impl Default for CertificateConfig {
    fn default() -> Self {
        Self {
            det_tol_per_dim: 1e-10,
            cert_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    Valid,
    SingularSystem,
    NegativeCoefficient,
    LargeResidual,
}

/// Solution of `M X = w∘w̄` where the columns of `M` are `v^i∘v̄^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportCertificate {
    pub system: DMatrix<f64>,
    pub rhs: Vec<f64>,
    pub solution: Vec<f64>,
    pub residual: f64,
    pub det: f64,
    pub det_abs: f64,
    pub status: CertificateStatus,
}

impl SupportCertificate {
    pub fn is_valid(&self) -> bool {
        self.status == CertificateStatus::Valid
    }

    pub fn min_coefficient(&self) -> f64 {
        self.solution.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `‖Σ X_i (v^i∘v̄^i) − w∘w̄‖_∞`.
    pub fn moment_mismatch(&self) -> f64 {
        let x = RVec::from_column_slice(&self.solution);
        let lhs = &self.system * x;
        lhs.iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary {
            det: self.det,
            residual: self.residual,
            x: self.solution.clone(),
            valid: self.is_valid(),
            status: self.status,
        }
    }
}

/// Wire form: `{"det": …, "residual": …, "X": […], "valid": bool}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub det: f64,
    pub residual: f64,
    #[serde(rename = "X")]
    pub x: Vec<f64>,
    pub valid: bool,
    pub status: CertificateStatus,
}

/// Builds and solves the square moment system for `n` columns of `V` and a
/// generator `w` of `W`.
///
/// Singular systems and nonpositive coefficients do not raise: the
/// certificate comes back with the matching status so campaigns can count
/// failures. A singular system is solved in the least-squares sense.
pub fn support_certificate(
    columns: &CMat,
    w: &CMat,
    cfg: &CertificateConfig,
) -> Result<SupportCertificate> {
    let n = columns.nrows();
    if columns.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "certificate needs exactly n = {n} columns, got {}",
            columns.ncols()
        )));
    }
    if w.nrows() != n || w.ncols() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "w must be {n}x1, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    let system = DMatrix::from_fn(n, n, |i, j| columns[(i, j)].norm_sqr());
    let rhs = RVec::from_vec(hadamard_square(w).into_vec());
    let (det, solved) = real_det_solve(&system, &rhs);
    let det_abs = det.abs();
    let singular = !(det_abs > cfg.det_tol_per_dim * n as f64);
    let x = match solved {
        Some(x) if !singular && x.iter().all(|v| v.is_finite()) => x,
        _ => real_lstsq(&system, &rhs),
    };
    let residual = (&system * &x - &rhs).norm();
    let min_x = x.iter().copied().fold(f64::INFINITY, f64::min);
    let status = if singular {
        CertificateStatus::SingularSystem
    } else if !(residual < cfg.cert_tol) {
        CertificateStatus::LargeResidual
    } else if !(min_x > 0.0) {
        CertificateStatus::NegativeCoefficient
    } else {
        CertificateStatus::Valid
    };
    Ok(SupportCertificate {
        system,
        rhs: rhs.iter().copied().collect(),
        solution: x.iter().copied().collect(),
        residual,
        det,
        det_abs,
        status,
    })
}

/// Scales column `i` by `sqrt(X_i)` and the whole system to unit Frobenius
/// norm. The result is a witness system in `V` whose moment is proportional
/// to `Σ X_i (v^i∘v̄^i)`.
pub fn normalize_witness(columns: &CMat, x: &[f64]) -> Result<CMat> {
    if x.len() != columns.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} columns",
            x.len(),
            columns.ncols()
        )));
    }
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonpositiveCoefficient { index, value });
    }
    let mut out = columns.clone();
    for (j, xj) in x.iter().enumerate() {
        let mut col = out.column_mut(j);
        col *= c(xj.sqrt(), 0.0);
    }
    let norm = frob_norm(&out);
    if !(norm > 0.0) {
        return Err(Error::ZeroInput);
    }
    Ok(out / c(norm, 0.0))
}
