use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::compose::Composition;
use super::fixtures::AppendixFixture;
use super::minimal::{certify_support, SupportEvidence};
use crate::domain::{OrthoPair, PairFile};
use crate::error::{Error, Result};
use crate::linalg::{c, exp_antihermitian, random_antihermitian_unit, CMat};
use crate::moment::{
    support_certificate, CertificateConfig, CertificateStatus, SupportCertificate,
};

/// A pair together with a square spanning system of `V` whose moment
/// certificate is valid.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedSupport {
    pair: OrthoPair,
    columns: CMat,
    w: CMat,
    certificate: SupportCertificate,
}

impl CertifiedSupport {
    /// `W` must be one dimensional; its basis vector is the generator `w`.
    /// Moments of vectors of `V` span at most `r²` dimensions, so a
    /// nonsingular square system needs `r² ≥ n`.
    pub fn new(pair: OrthoPair, columns: CMat) -> Result<Self> {
        if pair.s() != 1 {
            return Err(Error::Precondition(format!(
                "square certificates need dim W = 1, got {}",
                pair.s()
            )));
        }
        let n = pair.n();
        if pair.r() * pair.r() < n {
            return Err(Error::Precondition(format!(
                "moments of a {}-dimensional V span at most {} < n = {n} dimensions",
                pair.r(),
                pair.r() * pair.r()
            )));
        }
        if columns.shape() != (n, n) {
            return Err(Error::Precondition(format!(
                "a square certificate needs {n} columns in C^{n}, got {}x{}",
                columns.nrows(),
                columns.ncols()
            )));
        }
        let w = pair.w().clone();
        certify_support(
            &pair,
            SupportEvidence::Certificate {
                columns: &columns,
                w: &w,
            },
        )?;
        let certificate = support_certificate(&columns, &w, &CertificateConfig::default())?;
        Ok(Self {
            pair,
            columns,
            w,
            certificate,
        })
    }

    pub fn from_fixture(fx: &AppendixFixture) -> Result<Self> {
        Self::new(fx.pair.clone(), fx.columns.clone())
    }

    pub fn from_composition(comp: &Composition) -> Result<Self> {
        Self::new(comp.pair.clone(), comp.columns.clone())
    }

    /// Requires the optional `columns` entry of the file.
    pub fn from_pair_file(file: &PairFile, ortho_tol: f64) -> Result<Self> {
        let pair = file.validate(ortho_tol)?;
        let columns = file.columns.as_ref().ok_or_else(|| {
            Error::Precondition("pair file carries no square spanning system (\"columns\")".into())
        })?;
        Self::new(pair, columns.as_mat().clone())
    }

    pub fn pair(&self) -> &OrthoPair {
        &self.pair
    }

    pub fn columns(&self) -> &CMat {
        &self.columns
    }

    pub fn w(&self) -> &CMat {
        &self.w
    }

    pub fn certificate(&self) -> &SupportCertificate {
        &self.certificate
    }

    /// Certificate of `(QV, QW)` through the moved system `(Q v^i, Q w)`.
    pub fn perturbed_certificate(&self, q: &CMat) -> SupportCertificate {
        support_certificate(
            &(q * &self.columns),
            &(q * &self.w),
            &CertificateConfig::default(),
        )
        .expect("shapes are preserved by a square unitary")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub epsilon: f64,
    pub trials: usize,
    pub valid: usize,
    pub singular: usize,
    pub negative: usize,
    pub large_residual: usize,
    pub min_det_abs: f64,
    pub min_x: f64,
    pub max_residual: f64,
}

/// Perturbs by `Q = exp(εH)` with `H` anti-hermitian of unit Frobenius norm,
/// one independent `H` per trial (trial `i` uses ChaCha stream `i` of
/// `seed`).
pub fn interior_campaign(
    support: &CertifiedSupport,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<CampaignStats> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "epsilon must be nonnegative, got {epsilon}"
        )));
    }
    let n = support.pair.n();
    let certs: Vec<SupportCertificate> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let h = random_antihermitian_unit(n, &mut rng);
            let q = exp_antihermitian(&(h * c(epsilon, 0.0)));
            support.perturbed_certificate(&q)
        })
        .collect();
    let count = |s: CertificateStatus| certs.iter().filter(|c| c.status == s).count();
    Ok(CampaignStats {
        epsilon,
        trials,
        valid: count(CertificateStatus::Valid),
        singular: count(CertificateStatus::SingularSystem),
        negative: count(CertificateStatus::NegativeCoefficient),
        large_residual: count(CertificateStatus::LargeResidual),
        min_det_abs: certs
            .iter()
            .map(|c| c.det_abs)
            .fold(f64::INFINITY, f64::min),
        min_x: certs
            .iter()
            .map(|c| c.min_coefficient())
            .fold(f64::INFINITY, f64::min),
        max_residual: certs.iter().map(|c| c.residual).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::fixtures::{appendix_fixture, Appendix};
    use crate::domain::validate_pair;
    use crate::linalg::identity;

    #[test]
    fn zero_epsilon_reproduces_the_certificate() {
        let support = CertifiedSupport::from_fixture(&appendix_fixture(Appendix::A3)).unwrap();
        let cert = support.perturbed_certificate(&identity(3));
        assert!(cert
            .solution
            .iter()
            .zip(&support.certificate().solution)
            .all(|(a, b)| (a - b).abs() < 1e-12));
        let stats = interior_campaign(&support, 0.0, 5, 1).unwrap();
        assert_eq!(stats.valid, 5);
    }

    #[test]
    fn small_perturbations_stay_valid() {
        let support = CertifiedSupport::from_fixture(&appendix_fixture(Appendix::B4)).unwrap();
        let stats = interior_campaign(&support, 1e-3, 20, 7).unwrap();
        assert_eq!(stats.valid, 20);
        assert!(stats.min_x > 0.0);
    }

    #[test]
    fn one_dimensional_support_has_no_square_certificate() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = CMat::from_column_slice(2, 1, &[c(h, 0.0), c(h, 0.0)]);
        let w = CMat::from_column_slice(2, 1, &[c(h, 0.0), c(-h, 0.0)]);
        let pair = validate_pair(&v, &w, 1e-10).unwrap();
        let file = pair.to_file();
        assert!(matches!(
            CertifiedSupport::from_pair_file(&file, 1e-10),
            Err(Error::Precondition(_))
        ));
        // Every system repeats the single direction of V up to phase.
        let repeated = CMat::from_column_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(0.0, h), c(0.0, h)]);
        assert!(matches!(
            CertifiedSupport::new(pair.clone(), repeated.clone()),
            Err(Error::Precondition(_))
        ));
        assert!(
            !support_certificate(&repeated, pair.w(), &CertificateConfig::default())
                .unwrap()
                .is_valid()
        );
    }
}
