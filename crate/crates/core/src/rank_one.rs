//! Critical points of the adequacy objective at pairs of rank-one
//! projections `a = ãã*`, `b = b̃b̃*`, written in the coordinates
//! `α = 𝒱ã`, `β = 𝒲b̃` and their moduli `s = |α|`, `t = |β|`.
//!
//! ```text
//! λ/2 = Σ (s_k² − t_k²) s_k²        μ/2 = Σ (s_k² − t_k²) t_k²
//! σ_k = s_k³ − (λ/2 + t_k²) s_k      τ_k = −(t_k³ + (μ/2 − s_k²) t_k)
//! ```
//!
//! so `λ − μ = 2 Σ (s_k² − t_k²)² ≥ 0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{OrthoPair, SpherePoint};
use crate::error::{Error, Result};
use crate::linalg::{c, eigh, CMat, CVec};

/// Second eigenvalue bound under which a sphere point counts as rank one.
pub const RANK_ONE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct RankOneCritical {
    pub a_tilde: CVec,
    pub b_tilde: CVec,
    pub alpha: CVec,
    pub beta: CVec,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub phi: CVec,
    pub psi: CVec,
    pub sigma: Vec<f64>,
    pub tau: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
}

impl RankOneCritical {
    /// `|λ − μ − 2Σ(s_k² − t_k²)²|`.
    pub fn identity_defect(&self) -> f64 {
        let sum: f64 = self
            .s
            .iter()
            .zip(&self.t)
            .map(|(s, t)| (s * s - t * t).powi(2))
            .sum();
        (self.lambda - self.mu - 2.0 * sum).abs()
    }

    pub fn point(&self) -> SpherePoint {
        let a = &self.a_tilde * self.a_tilde.adjoint();
        let b = &self.b_tilde * self.b_tilde.adjoint();
        SpherePoint::from_parts_unchecked(a, b)
    }
}

/// Phase making `phase·z` real and nonnegative; `1` at `z = 0`.
fn unimodular_phase(z: Complex64) -> Complex64 {
    let m = z.norm();
    if m > 0.0 {
        z.conj() / m
    } else {
        c(1.0, 0.0)
    }
}

fn check_unit(name: &str, x: &CVec, len: usize) -> Result<()> {
    if x.len() != len {
        return Err(Error::DimensionMismatch(format!(
            "{name} has length {}, expected {len}",
            x.len()
        )));
    }
    let norm = x.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "{name} is not a unit vector (norm {norm})"
        )));
    }
    Ok(())
}

pub fn lift_rank_one(pair: &OrthoPair, a_tilde: &CVec, b_tilde: &CVec) -> Result<RankOneCritical> {
    check_unit("a_tilde", a_tilde, pair.r())?;
    check_unit("b_tilde", b_tilde, pair.s())?;
    let alpha: CVec = pair.v() * a_tilde;
    let beta: CVec = pair.w() * b_tilde;
    let s: Vec<f64> = alpha.iter().map(|z| z.norm()).collect();
    let t: Vec<f64> = beta.iter().map(|z| z.norm()).collect();
    let half_lambda: f64 = s.iter().zip(&t).map(|(s, t)| (s * s - t * t) * s * s).sum();
    let half_mu: f64 = s.iter().zip(&t).map(|(s, t)| (s * s - t * t) * t * t).sum();
    let phi = CVec::from_iterator(alpha.len(), alpha.iter().map(|&z| unimodular_phase(z)));
    let psi = CVec::from_iterator(beta.len(), beta.iter().map(|&z| unimodular_phase(z)));
    let sigma = s
        .iter()
        .zip(&t)
        .map(|(&s, &t)| s.powi(3) - (half_lambda + t * t) * s)
        .collect();
    let tau = s
        .iter()
        .zip(&t)
        .map(|(&s, &t)| -(t.powi(3) + (half_mu - s * s) * t))
        .collect();
    Ok(RankOneCritical {
        a_tilde: a_tilde.clone(),
        b_tilde: b_tilde.clone(),
        alpha,
        beta,
        s,
        t,
        phi,
        psi,
        sigma,
        tau,
        lambda: 2.0 * half_lambda,
        mu: 2.0 * half_mu,
    })
}

/// Top eigenvectors of `a` and `b` when both are rank one (second largest
/// eigenvalue below [`RANK_ONE_TOL`]).
pub fn rank_one_vectors(p: &SpherePoint) -> Option<(CVec, CVec)> {
    fn top(m: &CMat) -> Option<CVec> {
        let (values, vectors) = eigh(m);
        let k = values.len();
        if k >= 2 && values[k - 2].abs() >= RANK_ONE_TOL {
            return None;
        }
        Some(vectors.column(k - 1).into_owned())
    }
    Some((top(p.a())?, top(p.b())?))
}

/// Residuals of the two equivalent descriptions of a rank-one critical
/// point: `ii` the vector equations in `α`, `β`, and `iii` the real system
/// in `s, t, φ, ψ, σ, τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacterizationReport {
    /// `‖𝒱*((Δ − λ/2)∘α)‖`, `Δ_k = |α_k|² − |β_k|²`.
    pub ii_alpha: f64,
    /// `‖𝒲*((Δ − μ/2)∘β)‖`.
    pub ii_beta: f64,
    /// `|Σs_k² − 1| + |Σt_k² − 1|`.
    pub iii_a: f64,
    /// `max_k ||φ_k| − 1|, ||ψ_k| − 1|`.
    pub iii_b: f64,
    /// `ã = 𝒱*(φ̄∘s)` and `b̃ = 𝒲*(ψ̄∘t)` of unit norm.
    pub iii_c: f64,
    /// `‖𝒱*(φ̄∘σ)‖`.
    pub iii_d_sigma: f64,
    /// `‖𝒲*(ψ̄∘τ)‖`.
    pub iii_d_tau: f64,
    /// Cubic equations in `s_k`, with `λ/2` recomputed from `s, t`.
    pub iii_e_s: f64,
    /// Cubic equations in `t_k`, with `μ/2` recomputed from `s, t`.
    pub iii_e_t: f64,
    pub ii_residual: f64,
    pub iii_residual: f64,
    pub ii_pass: bool,
    pub iii_pass: bool,
    /// Both pass or both fail, with a factor 10 slack on the other side.
    pub agree: bool,
    pub tol: f64,
}

fn norm_of(v: CVec) -> f64 {
    v.norm()
}

pub fn verify_characterization(
    pair: &OrthoPair,
    cand: &RankOneCritical,
    tol: f64,
) -> Result<CharacterizationReport> {
    let n = pair.n();
    for (name, len) in [
        ("alpha", cand.alpha.len()),
        ("beta", cand.beta.len()),
        ("s", cand.s.len()),
        ("t", cand.t.len()),
    ] {
        if len != n {
            return Err(Error::DimensionMismatch(format!(
                "{name} has length {len}, n = {n}"
            )));
        }
    }
    let vs = pair.v().adjoint();
    let ws = pair.w().adjoint();

    // ii) from α, β alone.
    let delta: Vec<f64> = cand
        .alpha
        .iter()
        .zip(cand.beta.iter())
        .map(|(a, b)| a.norm_sqr() - b.norm_sqr())
        .collect();
    let weighted = |z: &CVec, shift: f64| {
        CVec::from_iterator(n, z.iter().zip(&delta).map(|(zk, dk)| zk * (dk - shift)))
    };
    let ii_alpha = norm_of(&vs * weighted(&cand.alpha, cand.lambda / 2.0));
    let ii_beta = norm_of(&ws * weighted(&cand.beta, cand.mu / 2.0));

    // iii) from s, t, φ, ψ, σ, τ alone.
    let sum_s: f64 = cand.s.iter().map(|x| x * x).sum();
    let sum_t: f64 = cand.t.iter().map(|x| x * x).sum();
    let iii_a = (sum_s - 1.0).abs() + (sum_t - 1.0).abs();
    let iii_b = cand
        .phi
        .iter()
        .chain(cand.psi.iter())
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);

    let scaled = |phase: &CVec, x: &[f64]| {
        CVec::from_iterator(n, phase.iter().zip(x).map(|(p, xk)| p.conj() * *xk))
    };
    let a_rebuilt = &vs * scaled(&cand.phi, &cand.s);
    let b_rebuilt = &ws * scaled(&cand.psi, &cand.t);
    let iii_c = (a_rebuilt.norm() - 1.0).abs()
        + (b_rebuilt.norm() - 1.0).abs()
        + (&a_rebuilt - &cand.a_tilde).norm()
        + (&b_rebuilt - &cand.b_tilde).norm();

    let iii_d_sigma = norm_of(&vs * scaled(&cand.phi, &cand.sigma));
    let iii_d_tau = norm_of(&ws * scaled(&cand.psi, &cand.tau));

    let half_lambda: f64 = cand
        .s
        .iter()
        .zip(&cand.t)
        .map(|(s, t)| (s * s - t * t) * s * s)
        .sum();
    let half_mu: f64 = cand
        .s
        .iter()
        .zip(&cand.t)
        .map(|(s, t)| (s * s - t * t) * t * t)
        .sum();
    let mut iii_e_s: f64 = 0.0;
    let mut iii_e_t: f64 = 0.0;
    for k in 0..n {
        let (s, t) = (cand.s[k], cand.t[k]);
        iii_e_s = iii_e_s.max((s.powi(3) - (half_lambda + t * t) * s - cand.sigma[k]).abs());
        iii_e_t = iii_e_t.max((t.powi(3) + (half_mu - s * s) * t + cand.tau[k]).abs());
    }

    let ii_residual = ii_alpha.max(ii_beta);
    let iii_residual = [
        iii_a,
        iii_b,
        iii_c,
        iii_d_sigma,
        iii_d_tau,
        iii_e_s,
        iii_e_t,
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let ii_pass = ii_residual < tol;
    let iii_pass = iii_residual < tol;
    let agree = (ii_pass && iii_residual < 10.0 * tol)
        || (iii_pass && ii_residual < 10.0 * tol)
        || (!ii_pass && !iii_pass);
    Ok(CharacterizationReport {
        ii_alpha,
        ii_beta,
        iii_a,
        iii_b,
        iii_c,
        iii_d_sigma,
        iii_d_tau,
        iii_e_s,
        iii_e_t,
        ii_residual,
        iii_residual,
        ii_pass,
        iii_pass,
        agree,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adequacy::critical_residual;
    use crate::domain::validate_pair;
    use crate::linalg::{random_complex_normal, random_isometry};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(n: usize, rng: &mut ChaCha8Rng) -> CVec {
        let z = random_complex_normal(n, 1, rng).column(0).into_owned();
        let norm = z.norm();
        z / c(norm, 0.0)
    }

    fn random_pair(seed: u64, n: usize, r: usize, s: usize) -> OrthoPair {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_isometry(n, r + s, &mut rng);
        validate_pair(
            &q.columns(0, r).into_owned(),
            &q.columns(r, s).into_owned(),
            1e-10,
        )
        .unwrap()
    }

    #[test]
    fn lambda_mu_identity_and_agreement_with_general_multipliers() {
        let pair = random_pair(1, 6, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let cand = lift_rank_one(&pair, &unit(3, &mut rng), &unit(2, &mut rng)).unwrap();
            assert!(cand.identity_defect() < 1e-12);
            assert!(cand.lambda >= cand.mu);
            let crit = critical_residual(&pair, &cand.point());
            assert!((crit.lambda - cand.lambda).abs() < 1e-12);
            assert!((crit.mu - cand.mu).abs() < 1e-12);
        }
    }

    #[test]
    fn global_phase_is_a_gauge() {
        let pair = random_pair(3, 5, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = unit(2, &mut rng);
        let b = unit(2, &mut rng);
        let x = lift_rank_one(&pair, &a, &b).unwrap();
        let y = lift_rank_one(&pair, &(&a * Complex64::from_polar(1.0, 0.7)), &b).unwrap();
        assert!(x.s.iter().zip(&y.s).all(|(p, q)| (p - q).abs() < 1e-14));
        assert!(x
            .sigma
            .iter()
            .zip(&y.sigma)
            .all(|(p, q)| (p - q).abs() < 1e-14));
        assert!((x.lambda - y.lambda).abs() < 1e-14 && (x.mu - y.mu).abs() < 1e-14);
    }

    #[test]
    fn scalar_case() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = CMat::from_column_slice(2, 1, &[c(h, 0.0), c(0.0, h)]);
        let w = CMat::from_column_slice(2, 1, &[c(h, 0.0), c(0.0, -h)]);
        let pair = validate_pair(&v, &w, 1e-10).unwrap();
        let one = CVec::from_element(1, c(1.0, 0.0));
        let cand = lift_rank_one(&pair, &one, &one).unwrap();
        assert!(cand.lambda.abs() < 1e-15 && cand.mu.abs() < 1e-15);
        assert!(cand.sigma.iter().chain(&cand.tau).all(|x| x.abs() < 1e-15));
        let rep = verify_characterization(&pair, &cand, 1e-10).unwrap();
        assert!(rep.ii_pass && rep.iii_pass && rep.agree);
    }

    #[test]
    fn random_candidates_fail_both_ways() {
        let pair = random_pair(5, 7, 3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let cand = lift_rank_one(&pair, &unit(3, &mut rng), &unit(3, &mut rng)).unwrap();
            let rep = verify_characterization(&pair, &cand, 1e-8).unwrap();
            assert!(rep.ii_residual > 1e-3 && rep.iii_residual > 1e-3);
            assert!(rep.agree);
        }
    }

    #[test]
    fn rejects_non_unit_vectors() {
        let pair = random_pair(5, 4, 2, 1);
        let a = CVec::from_element(2, c(1.0, 0.0));
        let b = CVec::from_element(1, c(1.0, 0.0));
        assert!(matches!(
            lift_rank_one(&pair, &a, &b),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn rank_one_detection() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = unit(3, &mut rng);
        let b = unit(2, &mut rng);
        let p = SpherePoint::from_parts_unchecked(&a * a.adjoint(), &b * b.adjoint());
        let (x, _) = rank_one_vectors(&p).unwrap();
        assert!((x.dotc(&a).norm() - 1.0).abs() < 1e-12);
        let full =
            SpherePoint::normalized(&crate::linalg::identity(3), &(&b * b.adjoint())).unwrap();
        assert!(rank_one_vectors(&full).is_none());
    }
}
