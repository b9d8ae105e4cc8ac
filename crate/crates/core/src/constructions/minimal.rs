use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adequacy::objective;
use crate::domain::{OrthoPair, SpherePoint};
use crate::error::{Error, Result};
use crate::linalg::{
    c, frob_norm, hermitian_defect, hermitian_spectral_norm, identity, real_diag, CMat,
};
use crate::moment::{support_certificate, CertificateConfig};

/// Adequacy below which a minimizer certifies a support.
pub const SUPPORT_TOL: f64 = 1e-10;

const STRUCTURE_TOL: f64 = 1e-10;

/// `Z = λ(P_V − P_W) + R` with `R` vanishing on `V ⊕ W` and `‖R‖ ≤ λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalMatrixSpec {
    pair: OrthoPair,
    lambda: f64,
    rest: CMat,
}

impl MinimalMatrixSpec {
    pub fn new(pair: OrthoPair, lambda: f64, rest: CMat) -> Result<Self> {
        let n = pair.n();
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Precondition(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if rest.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "R is {}x{}, expected {n}x{n}",
                rest.nrows(),
                rest.ncols()
            )));
        }
        if hermitian_defect(&rest) > STRUCTURE_TOL {
            return Err(Error::Precondition("R is not hermitian".into()));
        }
        for (name, p) in [("P_V", pair.proj_v()), ("P_W", pair.proj_w())] {
            let defect = frob_norm(&(&p * &rest)).max(frob_norm(&(&rest * &p)));
            if defect > STRUCTURE_TOL {
                return Err(Error::Precondition(format!(
                    "R does not vanish on {name} (defect {defect:.3e})"
                )));
            }
        }
        let norm = hermitian_spectral_norm(&rest);
        if norm > lambda + STRUCTURE_TOL {
            return Err(Error::Precondition(format!(
                "‖R‖ = {norm} exceeds lambda = {lambda}"
            )));
        }
        Ok(Self { pair, lambda, rest })
    }

    /// `R = 0`.
    pub fn projector_difference(pair: OrthoPair, lambda: f64) -> Result<Self> {
        let n = pair.n();
        Self::new(pair, lambda, CMat::zeros(n, n))
    }

    pub fn pair(&self) -> &OrthoPair {
        &self.pair
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rest(&self) -> &CMat {
        &self.rest
    }
}

/// Evidence that a pair is a support.
#[derive(Debug, Clone, Copy)]
pub enum SupportEvidence<'a> {
    /// `n` columns in `V` and a generator of `W` with a valid square
    /// moment certificate.
    Certificate { columns: &'a CMat, w: &'a CMat },
    /// A point of the spheres where the objective is below [`SUPPORT_TOL`].
    Minimizer(&'a SpherePoint),
}

/// Checks the evidence against `pair` itself.
pub fn certify_support(pair: &OrthoPair, evidence: SupportEvidence<'_>) -> Result<()> {
    match evidence {
        SupportEvidence::Certificate { columns, w } => {
            let n = pair.n();
            if columns.nrows() != n || w.nrows() != n {
                return Err(Error::DimensionMismatch(
                    "evidence does not live in C^n".into(),
                ));
            }
            let off_v = frob_norm(&((identity(n) - pair.proj_v()) * columns));
            let off_w = frob_norm(&((identity(n) - pair.proj_w()) * w));
            if off_v > 1e-8 * (1.0 + frob_norm(columns)) || off_w > 1e-8 * (1.0 + frob_norm(w)) {
                return Err(Error::NotASupport(format!(
                    "evidence vectors leave the subspaces (off V {off_v:.3e}, off W {off_w:.3e})"
                )));
            }
            let cert = support_certificate(columns, w, &CertificateConfig::default())?;
            if !cert.is_valid() {
                return Err(Error::NotASupport(format!(
                    "certificate status {:?}",
                    cert.status
                )));
            }
            Ok(())
        }
        SupportEvidence::Minimizer(p) => {
            if p.r() != pair.r() || p.s() != pair.s() {
                return Err(Error::DimensionMismatch(
                    "minimizer does not match the pair".into(),
                ));
            }
            let f = objective(pair, p);
            if !(f < SUPPORT_TOL) {
                return Err(Error::NotASupport(format!(
                    "adequacy {f:.3e} is not below {SUPPORT_TOL:.0e}"
                )));
            }
            Ok(())
        }
    }
}

/// `Z = λ(P_V − P_W) + R`, built only for certified supports.
pub fn build_minimal(spec: &MinimalMatrixSpec, evidence: SupportEvidence<'_>) -> Result<CMat> {
    certify_support(&spec.pair, evidence)?;
    let z = (spec.pair.proj_v() - spec.pair.proj_w()) * c(spec.lambda, 0.0) + &spec.rest;
    Ok((&z + z.adjoint()) * c(0.5, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub samples: usize,
    pub z_norm: f64,
    /// `min_D ‖Z + D‖` over the samples.
    pub min_perturbed_norm: f64,
    /// Samples with `‖Z + D‖ < ‖Z‖ − slack`.
    pub violations: usize,
    pub slack: f64,
}

/// Samples real diagonals with entries uniform in `[−bound, bound]` and
/// compares `‖Z + D‖` against `‖Z‖`. A necessary condition for minimality.
pub fn minimality_probe<R: Rng + ?Sized>(
    z: &CMat,
    bound: f64,
    samples: usize,
    slack: f64,
    rng: &mut R,
) -> ProbeResult {
    let n = z.nrows();
    let z_norm = hermitian_spectral_norm(z);
    let mut min_perturbed_norm = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..samples {
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
        let norm = hermitian_spectral_norm(&(z + real_diag(&d)));
        min_perturbed_norm = min_perturbed_norm.min(norm);
        if norm < z_norm - slack {
            violations += 1;
        }
    }
    ProbeResult {
        samples,
        z_norm,
        min_perturbed_norm,
        violations,
        slack,
    }
}
