//! The adequacy objective on `Σ_r × Σ_s` and its first and second order
//! structure.
//!
//! For a pair `(V, W)` with isometries `𝒱`, `𝒲` and a point `(a, b)`:
//!
//! ```text
//! Δ(a, b)  = diag(𝒱 a² 𝒱*) − diag(𝒲 b² 𝒲*)
//! F(a, b)  = ‖Δ‖²
//! grad F   = 2 ( S_a(𝒱*Δ𝒱)_tan , −S_b(𝒲*Δ𝒲)_tan ),   S_a(X) = aX + Xa
//! ```
//!
//! where `X_tan = X − ⟨X, a⟩ a` with the real trace inner product. The
//! adequacy `δ(V, W)` is the minimum of `F`.

mod descent;

pub use descent::{
    descend, descend_from, random_start, rank_one_start, AdequacyReport, AdequacyResult,
    DescentConfig,
};

use serde::{Deserialize, Serialize};

use crate::domain::{OrthoPair, SpherePoint};
use crate::error::{Error, Result};
use crate::linalg::{
    c, diag_congruence, frob_inner, frob_norm, herm_abs, hermitian_part, row_sq_norms, CMat,
};

/// A tangent vector `(X, Y)` at a sphere point, or an ambient direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub x: CMat,
    pub y: CMat,
}

impl Tangent {
    pub fn zeros(r: usize, s: usize) -> Self {
        Self {
            x: CMat::zeros(r, r),
            y: CMat::zeros(s, s),
        }
    }

    pub fn inner(&self, other: &Tangent) -> f64 {
        frob_inner(&self.x, &other.x) + frob_inner(&self.y, &other.y)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scaled(&self, t: f64) -> Tangent {
        Tangent {
            x: &self.x * c(t, 0.0),
            y: &self.y * c(t, 0.0),
        }
    }

    /// Hermitian part of each block, then the tangential component at `p`.
    pub fn projected(&self, p: &SpherePoint) -> Tangent {
        Tangent {
            x: tangential(&hermitian_part(&self.x), p.a()),
            y: tangential(&hermitian_part(&self.y), p.b()),
        }
    }
}

/// `S_a(x) = a x + x a`.
pub fn sym_product(a: &CMat, x: &CMat) -> CMat {
    a * x + x * a
}

/// `x − ⟨x, a⟩ a`.
pub fn tangential(x: &CMat, a: &CMat) -> CMat {
    x - a * c(frob_inner(x, a), 0.0)
}

fn check_dims(pair: &OrthoPair, p: &SpherePoint) {
    assert_eq!(
        p.r(),
        pair.r(),
        "sphere point a is {}x{0}, pair has r = {}",
        p.r(),
        pair.r()
    );
    assert_eq!(
        p.s(),
        pair.s(),
        "sphere point b is {}x{0}, pair has s = {}",
        p.s(),
        pair.s()
    );
}

/// `Δ = diag(𝒱a²𝒱*) − diag(𝒲b²𝒲*)` as a real vector of length `n`.
pub fn delta_diag(pair: &OrthoPair, p: &SpherePoint) -> Vec<f64> {
    check_dims(pair, p);
    let va = pair.v() * p.a();
    let wb = pair.w() * p.b();
    row_sq_norms(&va)
        .into_iter()
        .zip(row_sq_norms(&wb))
        .map(|(x, y)| x - y)
        .collect()
}

/// `F(a, b) = ‖Δ‖²`.
pub fn objective(pair: &OrthoPair, p: &SpherePoint) -> f64 {
    delta_diag(pair, p).iter().map(|d| d * d).sum()
}

/// The compressions `(𝒱*Δ𝒱, 𝒲*Δ𝒲)`.
pub fn compressed_delta(pair: &OrthoPair, delta: &[f64]) -> (CMat, CMat) {
    (
        diag_congruence(pair.v(), delta),
        diag_congruence(pair.w(), delta),
    )
}

/// Riemannian gradient of `F` at `p`.
pub fn gradient(pair: &OrthoPair, p: &SpherePoint) -> Tangent {
    let delta = delta_diag(pair, p);
    gradient_with_delta(pair, p, &delta)
}

pub(crate) fn gradient_with_delta(pair: &OrthoPair, p: &SpherePoint, delta: &[f64]) -> Tangent {
    let (g, h) = compressed_delta(pair, delta);
    let sa = hermitian_part(&sym_product(p.a(), &g));
    let sb = hermitian_part(&sym_product(p.b(), &h));
    Tangent {
        x: tangential(&sa, p.a()) * c(2.0, 0.0),
        y: tangential(&sb, p.b()) * c(-2.0, 0.0),
    }
}

/// Lagrange multipliers and residuals of the critical point equations
/// `S_a(𝒱*Δ𝒱) = λ a`, `S_b(𝒲*Δ𝒲) = μ b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalResidual {
    pub lambda: f64,
    pub mu: f64,
    pub res_a: f64,
    pub res_b: f64,
}

pub fn critical_residual(pair: &OrthoPair, p: &SpherePoint) -> CriticalResidual {
    let delta = delta_diag(pair, p);
    let (g, h) = compressed_delta(pair, &delta);
    let sa = sym_product(p.a(), &g);
    let sb = sym_product(p.b(), &h);
    let lambda = frob_inner(&sa, p.a());
    let mu = frob_inner(&sb, p.b());
    CriticalResidual {
        lambda,
        mu,
        res_a: frob_norm(&(sa - p.a() * c(lambda, 0.0))),
        res_b: frob_norm(&(sb - p.b() * c(mu, 0.0))),
    }
}

/// `(‖(𝒱*Δ𝒱)a − (λ/2)a‖_F, ‖(𝒲*Δ𝒲)b − (μ/2)b‖_F)`, the commuting form of
/// the critical point equations when `a, b ⪰ 0`.
pub fn commutation_residual(pair: &OrthoPair, p: &SpherePoint) -> (f64, f64) {
    let crit = critical_residual(pair, p);
    let delta = delta_diag(pair, p);
    let (g, h) = compressed_delta(pair, &delta);
    let ra = &g * p.a() - p.a() * c(crit.lambda / 2.0, 0.0);
    let rb = &h * p.b() - p.b() * c(crit.mu / 2.0, 0.0);
    (frob_norm(&ra), frob_norm(&rb))
}

/// `diag(m s m*)` for hermitian `s`.
pub(crate) fn diag_of_congruence(m: &CMat, s: &CMat) -> Vec<f64> {
    let ms = m * s;
    (0..m.nrows())
        .map(|k| {
            (0..m.ncols())
                .map(|j| (ms[(k, j)] * m[(k, j)].conj()).re)
                .sum()
        })
        .collect()
}

/// Residual bound under which a point is accepted as critical for the
/// Hessian formula.
pub const HESSIAN_CRITICAL_TOL: f64 = 1e-6;

/// Second derivative of `F` along the sphere geodesic through `p` with
/// initial velocity `(X, Y)`:
///
/// ```text
/// 2‖∂_XΔ + ∂_YΔ‖² + 4(⟨𝒱*Δ𝒱, X² − a²‖X‖²⟩ − ⟨𝒲*Δ𝒲, Y² − b²‖Y‖²⟩)
/// ∂_XΔ = diag(𝒱 S_a(X) 𝒱*),  ∂_YΔ = −diag(𝒲 S_b(Y) 𝒲*)
/// ```
///
/// Only meaningful at critical points, where it is the Riemannian Hessian
/// quadratic form; elsewhere `NotCritical` is returned.
pub fn hessian_quadratic(pair: &OrthoPair, p: &SpherePoint, t: &Tangent) -> Result<f64> {
    let crit = critical_residual(pair, p);
    if crit.res_a > HESSIAN_CRITICAL_TOL || crit.res_b > HESSIAN_CRITICAL_TOL {
        return Err(Error::NotCritical {
            res_a: crit.res_a,
            res_b: crit.res_b,
            tol: HESSIAN_CRITICAL_TOL,
        });
    }
    let scale = 1.0 + t.norm();
    let off_a = frob_inner(&t.x, p.a()).abs();
    let off_b = frob_inner(&t.y, p.b()).abs();
    if off_a > 1e-8 * scale || off_b > 1e-8 * scale {
        return Err(Error::Precondition(format!(
            "direction is not tangent (⟨X,a⟩ = {off_a:.3e}, ⟨Y,b⟩ = {off_b:.3e})"
        )));
    }
    Ok(hessian_quadratic_unchecked(pair, p, t))
}

pub(crate) fn hessian_quadratic_unchecked(pair: &OrthoPair, p: &SpherePoint, t: &Tangent) -> f64 {
    let delta = delta_diag(pair, p);
    let (g, h) = compressed_delta(pair, &delta);
    let dx = diag_of_congruence(pair.v(), &sym_product(p.a(), &t.x));
    let dy = diag_of_congruence(pair.w(), &sym_product(p.b(), &t.y));
    let first: f64 = dx.iter().zip(&dy).map(|(u, v)| (u - v) * (u - v)).sum();

    let xnorm2 = frob_inner(&t.x, &t.x);
    let ynorm2 = frob_inner(&t.y, &t.y);
    let qx = &t.x * &t.x - p.a() * p.a() * c(xnorm2, 0.0);
    let qy = &t.y * &t.y - p.b() * p.b() * c(ynorm2, 0.0);
    let second = frob_inner(&g, &qx) - frob_inner(&h, &qy);
    2.0 * first + 4.0 * second
}

/// `((a + X)/‖a + X‖, (b + Y)/‖b + Y‖)`: smooth retraction used by the
/// finite-difference checks.
pub fn retract_normalize(p: &SpherePoint, dir: &Tangent) -> SpherePoint {
    SpherePoint::normalized(&(p.a() + &dir.x), &(p.b() + &dir.y))
        .expect("a + X cannot vanish for tangent X")
}

/// `(|a + X|/‖|a + X|‖, |b + Y|/‖|b + Y|‖)`: modulus then normalize, the
/// update map of the descent iteration. Lands in the positive part of the
/// sphere.
pub fn retract_modulus(p: &SpherePoint, dir: &Tangent) -> SpherePoint {
    let alpha = herm_abs(&(p.a() + &dir.x));
    let beta = herm_abs(&(p.b() + &dir.y));
    SpherePoint::normalized(&alpha, &beta).expect("modulus of a + X cannot vanish for tangent X")
}

/// `(|a|, |b|)`, which has the same objective value as `(a, b)`.
pub fn positive_part(p: &SpherePoint) -> SpherePoint {
    SpherePoint::from_parts_unchecked(herm_abs(p.a()), herm_abs(p.b()))
}
