//! Certified supports: the exact fixtures A3, B4 and C5, block compositions
//! of them, perturbation campaigns around a certified support, curve sweeps
//! and the minimal matrices a support carries.

pub mod compose;
pub mod fixtures;
pub mod minimal;
pub mod perturb;
pub mod sweep;

pub use compose::{block_compose, Composition, CompositionSummary};
pub use fixtures::{appendix_fixture, Appendix, AppendixFixture};
pub use minimal::{
    build_minimal, certify_support, minimality_probe, MinimalMatrixSpec, ProbeResult,
    SupportEvidence, SUPPORT_TOL,
};
pub use perturb::{interior_campaign, CampaignStats, CertifiedSupport};
pub use sweep::{sweep_curve, SweepSample, SweepSpec, SweepTable};

use crate::domain::{OrthoPair, SpherePoint};
use crate::error::{Error, Result};
use crate::linalg::{c, psd_sqrt, CMat};

/// The zero of the objective carried by a moment certificate when
/// `dim W = 1`: `a² ∝ Σ X_i (𝒱*v^i)(𝒱*v^i)*` and `b = 1`.
pub fn witness_point(pair: &OrthoPair, columns: &CMat, x: &[f64]) -> Result<SpherePoint> {
    if pair.s() != 1 {
        return Err(Error::Precondition(format!(
            "witness point needs dim W = 1, got {}",
            pair.s()
        )));
    }
    if columns.ncols() != x.len() || columns.nrows() != pair.n() {
        return Err(Error::DimensionMismatch(
            "columns and coefficients disagree".into(),
        ));
    }
    let coords = pair.v().adjoint() * columns;
    let mut c_hat = CMat::zeros(pair.r(), pair.r());
    for (j, xj) in x.iter().enumerate() {
        let u = coords.column(j);
        c_hat += u * u.adjoint() * c(*xj, 0.0);
    }
    let tr: f64 = (0..pair.r()).map(|i| c_hat[(i, i)].re).sum();
    if !(tr > 0.0) {
        return Err(Error::ZeroInput);
    }
    let a = psd_sqrt(&(c_hat / c(tr, 0.0)));
    SpherePoint::normalized(&a, &crate::linalg::identity(1))
}
