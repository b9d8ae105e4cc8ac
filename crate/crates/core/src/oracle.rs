//! Adequacy as the squared distance between the convex sets `Φ(σ_V)` and
//! `Φ(σ_W)`, computed by Frank-Wolfe. The linear minimization oracle over
//! `σ_V` is a rank-one projector onto an extreme eigenvector, so every
//! iterate is a convex combination of moments of unit vectors.

use serde::{Deserialize, Serialize};

use crate::domain::OrthoPair;
use crate::error::{Error, Result};
use crate::linalg::{c, diag_congruence, eigh, frob_norm, identity, row_sq_norms, CMat};

/// `(c, d) = (𝒱ĉ𝒱*, 𝒲d̂𝒲*)` stored through the compact blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPoint {
    pub c_hat: CMat,
    pub d_hat: CMat,
}

impl DensityPoint {
    pub fn c_full(&self, pair: &OrthoPair) -> CMat {
        pair.v() * &self.c_hat * pair.v().adjoint()
    }

    pub fn d_full(&self, pair: &OrthoPair) -> CMat {
        pair.w() * &self.d_hat * pair.w().adjoint()
    }

    /// Largest violation among `tr = 1`, `⪰ 0` and range containment for
    /// both blocks, measured on the full `n x n` matrices.
    pub fn feasibility_defect(&self, pair: &OrthoPair) -> f64 {
        let n = pair.n();
        let mut worst: f64 = 0.0;
        for (full, proj) in [
            (self.c_full(pair), pair.proj_v()),
            (self.d_full(pair), pair.proj_w()),
        ] {
            let tr: f64 = (0..n).map(|i| full[(i, i)].re).sum();
            worst = worst.max((tr - 1.0).abs());
            worst = worst.max(-eigh(&full).0[0]);
            worst = worst.max(frob_norm(&((identity(n) - proj) * &full)));
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwConfig {
    pub max_iters: usize,
    pub gap_tol: f64,
    /// Exact minimization along each segment instead of the `2/(k+2)` rule.
    pub line_search: bool,
}

impl Default for FwConfig {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            gap_tol: 1e-9,
            line_search: true,
        }
    }
}

impl FwConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        if !(self.gap_tol > 0.0) || !self.gap_tol.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "gap_tol must be positive, got {}",
                self.gap_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FwResult {
    pub delta: f64,
    pub point: DensityPoint,
    pub fw_gap: f64,
    pub iters: usize,
    pub converged: bool,
}

impl FwResult {
    pub fn report(&self) -> FwReport {
        FwReport {
            delta: self.delta,
            fw_gap: self.fw_gap,
            iters: self.iters,
            converged: self.converged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwReport {
    pub delta: f64,
    pub fw_gap: f64,
    pub iters: usize,
    pub converged: bool,
}

/// Unit eigenvector of the smallest (`largest = false`) or largest
/// eigenvalue of a hermitian matrix.
fn extreme_eigenvector(h: &CMat, largest: bool) -> CMat {
    let (_, vectors) = eigh(h);
    let j = if largest { h.nrows() - 1 } else { 0 };
    vectors.columns(j, 1).into_owned()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn convex_step(x: &mut [f64], target: &[f64], gamma: f64) {
    for (xi, ti) in x.iter_mut().zip(target) {
        *xi += gamma * (ti - *xi);
    }
}

fn blend(m: &CMat, u: &CMat, gamma: f64) -> CMat {
    m * c(1.0 - gamma, 0.0) + u * u.adjoint() * c(gamma, 0.0)
}

/// Minimizes `g(c, d) = ‖Φ(c) − Φ(d)‖²` over `σ_V × σ_W` starting from the
/// normalized projectors. On return `delta − min g ≤ fw_gap`.
pub fn fw_distance(pair: &OrthoPair, cfg: &FwConfig) -> Result<FwResult> {
    cfg.validate()?;
    let (r, s) = (pair.r(), pair.s());
    let mut c_hat = identity(r) / c(r as f64, 0.0);
    let mut d_hat = identity(s) / c(s as f64, 0.0);
    let mut mc: Vec<f64> = row_sq_norms(pair.v())
        .iter()
        .map(|x| x / r as f64)
        .collect();
    let mut md: Vec<f64> = row_sq_norms(pair.w())
        .iter()
        .map(|x| x / s as f64)
        .collect();

    let mut iters = 0;
    let mut gap = f64::INFINITY;
    while iters < cfg.max_iters {
        let delta: Vec<f64> = mc.iter().zip(&md).map(|(x, y)| x - y).collect();
        let u = extreme_eigenvector(&diag_congruence(pair.v(), &delta), false);
        let v = extreme_eigenvector(&diag_congruence(pair.w(), &delta), true);
        let ms = row_sq_norms(&(pair.v() * &u));
        let ns = row_sq_norms(&(pair.w() * &v));

        let to_c: Vec<f64> = mc.iter().zip(&ms).map(|(x, y)| x - y).collect();
        let to_d: Vec<f64> = md.iter().zip(&ns).map(|(x, y)| x - y).collect();
        gap = 2.0 * dot(&delta, &to_c) - 2.0 * dot(&delta, &to_d);
        if gap < cfg.gap_tol {
            break;
        }

        let gamma = if cfg.line_search {
            // Δ(γ) = Δ + γ·dd along the segment.
            let dd: Vec<f64> = ms
                .iter()
                .zip(&ns)
                .zip(&delta)
                .map(|((a, b), d)| a - b - d)
                .collect();
            let curvature = dot(&dd, &dd);
            if curvature > 0.0 {
                (-dot(&delta, &dd) / curvature).clamp(0.0, 1.0)
            } else {
                0.0
            }
        } else {
            2.0 / (iters as f64 + 2.0)
        };
        c_hat = blend(&c_hat, &u, gamma);
        d_hat = blend(&d_hat, &v, gamma);
        convex_step(&mut mc, &ms, gamma);
        convex_step(&mut md, &ns, gamma);
        iters += 1;
        debug_assert!((0..r).map(|i| c_hat[(i, i)].re).sum::<f64>() - 1.0 < 1e-10);
    }

    let delta: f64 = mc.iter().zip(&md).map(|(x, y)| (x - y) * (x - y)).sum();
    let converged = gap < cfg.gap_tol;
    if !converged {
        log::warn!("frank-wolfe stopped after {iters} iterations with gap {gap:.3e}");
    }
    Ok(FwResult {
        delta,
        point: DensityPoint { c_hat, d_hat },
        fw_gap: gap.max(0.0),
        iters,
        converged,
    })
}

/// Outcome of a membership query `target ∈ Φ(σ_V)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// `min ‖Φ(c) − target‖²` as reached by Frank-Wolfe.
    pub distance_sq: f64,
    pub fw_gap: f64,
    /// Best `c = 𝒱ĉ𝒱*` found; returned only for members.
    pub witness: Option<CMat>,
}

/// Decides `target ∈ Φ(σ_V)` up to `tol`: member iff the squared distance
/// reached is at most `tol²`. Non-members are certified by
/// `distance_sq − fw_gap > tol²`.
pub fn moment_body_membership(
    pair: &OrthoPair,
    target: &[f64],
    tol: f64,
    cfg: &FwConfig,
) -> Result<Membership> {
    cfg.validate()?;
    let n = pair.n();
    if target.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "target has length {}, n = {n}",
            target.len()
        )));
    }
    if let Some(x) = target.iter().find(|x| !(**x >= -1e-12)) {
        return Err(Error::Precondition(format!("target entry {x} is negative")));
    }
    let total: f64 = target.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "target sums to {total}, not 1"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tol must be positive, got {tol}"
        )));
    }

    let r = pair.r();
    let mut c_hat = identity(r) / c(r as f64, 0.0);
    let mut mc: Vec<f64> = row_sq_norms(pair.v())
        .iter()
        .map(|x| x / r as f64)
        .collect();
    let mut gap = f64::INFINITY;
    for k in 0..cfg.max_iters {
        let delta: Vec<f64> = mc.iter().zip(target).map(|(x, t)| x - t).collect();
        let u = extreme_eigenvector(&diag_congruence(pair.v(), &delta), false);
        let ms = row_sq_norms(&(pair.v() * &u));
        let dd: Vec<f64> = ms.iter().zip(&mc).map(|(a, b)| a - b).collect();
        gap = -2.0 * dot(&delta, &dd);
        let dist = dot(&delta, &delta);
        // Stop once membership is decided either way: the distance is below
        // tol², or even the lower bound dist − gap exceeds it.
        if gap < cfg.gap_tol || dist <= tol * tol || dist - gap > tol * tol {
            break;
        }
        let gamma = if cfg.line_search {
            let curvature = dot(&dd, &dd);
            if curvature > 0.0 {
                (-dot(&delta, &dd) / curvature).clamp(0.0, 1.0)
            } else {
                0.0
            }
        } else {
            2.0 / (k as f64 + 2.0)
        };
        c_hat = blend(&c_hat, &u, gamma);
        convex_step(&mut mc, &ms, gamma);
    }
    let distance_sq: f64 = mc.iter().zip(target).map(|(x, t)| (x - t) * (x - t)).sum();
    let member = distance_sq <= tol * tol;
    let witness = member.then(|| pair.v() * &c_hat * pair.v().adjoint());
    Ok(Membership {
        member,
        distance_sq,
        fw_gap: gap.max(0.0),
        witness,
    })
}
