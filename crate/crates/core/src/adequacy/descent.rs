use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    compressed_delta, critical_residual, delta_diag, diag_of_congruence, gradient,
    gradient_with_delta, objective, positive_part, retract_modulus, retract_normalize, sym_product,
    Tangent,
};
use crate::domain::{OrthoPair, SpherePoint, SpherePointFile};
use crate::error::{Error, Result};
use crate::linalg::{
    c, diag_congruence, eigh, frob_inner, identity, orthonormal_basis, random_complex_normal,
    random_hermitian, real_lstsq, CMat, CVec, RVec,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentConfig {
    pub max_iters: usize,
    pub step: f64,
    pub grad_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub line_search: bool,
    /// Continue with projected gradient on `(a², b²)` when the modulus
    /// iteration has not reached `grad_tol` within `max_iters`.
    pub refine: bool,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            step: 1.0,
            grad_tol: 1e-11,
            restarts: 16,
            seed: 0,
            line_search: false,
            refine: true,
        }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step must lie in (0, 1], got {}",
                self.step
            )));
        }
        if !(self.grad_tol > 0.0) || !self.grad_tol.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grad_tol must be positive, got {}",
                self.grad_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdequacyResult {
    pub delta: f64,
    pub minimizer: SpherePoint,
    pub grad_norm: f64,
    pub lambda: f64,
    pub mu: f64,
    pub iterations: usize,
    pub restart_index: usize,
    pub converged: bool,
    pub refined: bool,
}

impl AdequacyResult {
    pub fn report(&self) -> AdequacyReport {
        AdequacyReport {
            delta: self.delta,
            minimizer: self.minimizer.to_file(),
            grad_norm: self.grad_norm,
            lambda: self.lambda,
            mu: self.mu,
            iterations: self.iterations,
            restart_index: self.restart_index,
            converged: self.converged,
            refined: self.refined,
        }
    }
}

/// JSON form of an [`AdequacyResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdequacyReport {
    pub delta: f64,
    pub minimizer: SpherePointFile,
    pub grad_norm: f64,
    pub lambda: f64,
    pub mu: f64,
    pub iterations: usize,
    pub restart_index: usize,
    pub converged: bool,
    pub refined: bool,
}

/// Positive definite start: hermitian Ginibre part shifted by
/// `(|λ_min| + 0.1) I`, scaled to trace one and then onto the sphere.
fn random_positive_start<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let h = random_hermitian(n, rng);
    let lmin = eigh(&h).0[0];
    let shifted = h + identity(n) * c(lmin.abs() + 0.1, 0.0);
    let tr: f64 = (0..n).map(|i| shifted[(i, i)].re).sum();
    shifted / c(tr, 0.0)
}

pub fn random_start<R: Rng + ?Sized>(r: usize, s: usize, rng: &mut R) -> SpherePoint {
    let a = random_positive_start(r, rng);
    let b = random_positive_start(s, rng);
    SpherePoint::normalized(&a, &b).expect("positive definite starts are nonzero")
}

/// `(uu*, vv*)` for random unit vectors `u ∈ C^r`, `v ∈ C^s`.
pub fn rank_one_start<R: Rng + ?Sized>(r: usize, s: usize, rng: &mut R) -> SpherePoint {
    let u = random_complex_normal(r, 1, rng);
    let v = random_complex_normal(s, 1, rng);
    SpherePoint::normalized(&(&u * u.adjoint()), &(&v * v.adjoint()))
        .expect("gaussian vectors are nonzero")
}

fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Multi-start descent. Restart `i` draws its start from the ChaCha stream
/// `i` of `seed`, so results are independent of scheduling.
pub fn descend(pair: &OrthoPair, cfg: &DescentConfig) -> Result<AdequacyResult> {
    cfg.validate()?;
    let runs: Vec<AdequacyResult> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = restart_rng(cfg.seed, i);
            let start = random_start(pair.r(), pair.s(), &mut rng);
            let mut res = run(pair, cfg, start);
            res.restart_index = i;
            res
        })
        .collect();
    let best = runs
        .into_iter()
        .min_by(|x, y| {
            x.delta
                .total_cmp(&y.delta)
                .then(x.restart_index.cmp(&y.restart_index))
        })
        .expect("at least one restart");
    if !best.converged {
        log::warn!(
            "descent did not reach grad_tol {:.1e}: grad_norm {:.3e} after {} iterations",
            cfg.grad_tol,
            best.grad_norm,
            best.iterations
        );
    }
    Ok(best)
}

/// Single run from `start` (replaced by `(|a|, |b|)`, which has the same
/// objective value). `cfg.restarts` and `cfg.seed` are ignored.
pub fn descend_from(
    pair: &OrthoPair,
    cfg: &DescentConfig,
    start: &SpherePoint,
) -> Result<AdequacyResult> {
    cfg.validate()?;
    if start.r() != pair.r() || start.s() != pair.s() {
        return Err(Error::DimensionMismatch(format!(
            "start is ({}, {}), pair has (r, s) = ({}, {})",
            start.r(),
            start.s(),
            pair.r(),
            pair.s()
        )));
    }
    Ok(run(pair, cfg, positive_part(start)))
}

struct Phase {
    point: SpherePoint,
    iterations: usize,
    converged: bool,
}

fn run(pair: &OrthoPair, cfg: &DescentConfig, start: SpherePoint) -> AdequacyResult {
    let first = modulus_iteration(pair, cfg, start);
    let (point, iterations, converged, refined) = if first.converged || !cfg.refine {
        (first.point, first.iterations, first.converged, false)
    } else {
        let second = spectraplex_refinement(pair, cfg, first.point);
        (
            second.point,
            first.iterations + second.iterations,
            second.converged,
            true,
        )
    };
    finish(pair, point, iterations, converged, refined)
}

fn finish(
    pair: &OrthoPair,
    point: SpherePoint,
    iterations: usize,
    converged: bool,
    refined: bool,
) -> AdequacyResult {
    let delta = delta_diag(pair, &point);
    let grad_norm = gradient_with_delta(pair, &point, &delta).norm();
    let crit = critical_residual(pair, &point);
    if converged && crit.lambda < crit.mu {
        log::warn!(
            "converged point has lambda {:.3e} < mu {:.3e}",
            crit.lambda,
            crit.mu
        );
    }
    AdequacyResult {
        delta: delta.iter().map(|d| d * d).sum(),
        minimizer: point,
        grad_norm,
        lambda: crit.lambda,
        mu: crit.mu,
        iterations,
        restart_index: 0,
        converged,
        refined,
    }
}

/// `(a, b) ← (|a − t·grad_a|, |b − t·grad_b|)` normalized.
fn modulus_iteration(pair: &OrthoPair, cfg: &DescentConfig, start: SpherePoint) -> Phase {
    const MAX_HALVINGS: usize = 30;
    let mut p = start;
    for it in 0..cfg.max_iters {
        let delta = delta_diag(pair, &p);
        let g = gradient_with_delta(pair, &p, &delta);
        if g.norm() < cfg.grad_tol {
            return Phase {
                point: p,
                iterations: it,
                converged: true,
            };
        }
        if !cfg.line_search {
            p = retract_modulus(&p, &g.scaled(-cfg.step));
            continue;
        }
        let f0: f64 = delta.iter().map(|d| d * d).sum();
        let mut step = cfg.step;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let cand = retract_modulus(&p, &g.scaled(-step));
            if objective(pair, &cand) <= f0 {
                accepted = Some(cand);
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some(q) => p = q,
            None => {
                return Phase {
                    point: p,
                    iterations: it,
                    converged: false,
                }
            }
        }
    }
    let converged = gradient(pair, &p).norm() < cfg.grad_tol;
    Phase {
        point: p,
        iterations: cfg.max_iters,
        converged,
    }
}

/// Euclidean projection of a hermitian matrix onto `{c ⪰ 0, tr c = 1}`.
/// Returns `(c, c^{1/2})`. Eigenvalues at rounding level are set to zero:
/// the square root would lift them to about `1e-8`.
fn project_spectraplex(x: &CMat) -> (CMat, CMat) {
    let (values, vectors) = eigh(x);
    let mut mu = project_simplex(&values);
    let floor = 1e-14 * mu.iter().copied().fold(0.0, f64::max);
    mu.iter_mut().filter(|m| **m < floor).for_each(|m| *m = 0.0);
    let total: f64 = mu.iter().sum();
    mu.iter_mut().for_each(|m| *m /= total);
    let mut scaled = vectors.clone();
    let mut rooted = vectors.clone();
    for (j, m) in mu.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*m);
        rooted.column_mut(j).scale_mut(m.sqrt());
    }
    let adj = vectors.adjoint();
    (&scaled * &adj, &rooted * &adj)
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Hermitian `k x k` matrices orthonormal for the real trace inner product,
/// the `k` diagonal units first.
fn hermitian_basis(k: usize) -> Vec<CMat> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(k * k);
    for i in 0..k {
        let mut e = CMat::zeros(k, k);
        e[(i, i)] = c(1.0, 0.0);
        basis.push(e);
    }
    for i in 0..k {
        for j in i + 1..k {
            let mut re = CMat::zeros(k, k);
            re[(i, j)] = c(h, 0.0);
            re[(j, i)] = c(h, 0.0);
            let mut im = CMat::zeros(k, k);
            im[(i, j)] = c(0.0, h);
            im[(j, i)] = c(0.0, -h);
            basis.push(re);
            basis.push(im);
        }
    }
    basis
}

/// Orthonormal eigenvectors of `x` with eigenvalue above `rel_tol · λ_max`.
fn dominant_range(x: &CMat, rel_tol: f64) -> CMat {
    let (values, vectors) = eigh(x);
    let top = values.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..values.len())
        .filter(|&j| values[j] > rel_tol * top)
        .collect();
    CMat::from_fn(x.nrows(), keep.len(), |i, j| vectors[(i, keep[j])])
}

/// Least-squares minimizer of the quadratic `F` over
/// `{U C U* : tr C = 1} × {U' D U'* : tr D = 1}` with `C`, `D` hermitian,
/// taking the smallest coordinate step from the compression of `(c, d)`.
/// The result need not be PSD.
fn face_solve(pair: &OrthoPair, cm: &CMat, dm: &CMat, uc: &CMat, ud: &CMat) -> (CMat, CMat) {
    let (k, l) = (uc.ncols(), ud.ncols());
    let (mv, mw) = (pair.v() * uc, pair.w() * ud);
    let (bc, bd) = (hermitian_basis(k), hermitian_basis(l));
    let p = bc.len() + bd.len();

    let mut a = nalgebra::DMatrix::<f64>::zeros(pair.n(), p);
    for (j, e) in bc.iter().enumerate() {
        a.set_column(j, &RVec::from_vec(diag_of_congruence(&mv, e)));
    }
    for (j, e) in bd.iter().enumerate() {
        a.set_column(bc.len() + j, &(-RVec::from_vec(diag_of_congruence(&mw, e))));
    }
    let mut x0 = RVec::zeros(p);
    for (offset, basis, u, m) in [(0, &bc, uc, cm), (bc.len(), &bd, ud, dm)] {
        let compressed = u.adjoint() * m * u;
        let tr = trace_re(&compressed);
        let size = u.ncols();
        for (j, e) in basis.iter().enumerate() {
            x0[offset + j] = if tr > 0.0 {
                frob_inner(e, &compressed) / tr
            } else if j < size {
                1.0 / size as f64
            } else {
                0.0
            };
        }
    }

    // Directions keeping both traces: e_i − e_0 on the diagonals and every
    // off-diagonal coordinate.
    let mut free: Vec<RVec> = Vec::with_capacity(p - 2);
    for (offset, size, dim) in [(0, k, bc.len()), (bc.len(), l, bd.len())] {
        for i in 1..size {
            let mut z = RVec::zeros(p);
            z[offset] = -1.0;
            z[offset + i] = 1.0;
            free.push(z);
        }
        for j in size..dim {
            let mut z = RVec::zeros(p);
            z[offset + j] = 1.0;
            free.push(z);
        }
    }
    let x = if free.is_empty() {
        x0
    } else {
        let z = nalgebra::DMatrix::from_columns(&free);
        let y = real_lstsq(&(&a * &z), &(-(&a * &x0)));
        x0 + z * y
    };

    let assemble = |basis: &[CMat], coords: &[f64], u: &CMat| {
        let inner = basis
            .iter()
            .zip(coords)
            .fold(CMat::zeros(u.ncols(), u.ncols()), |acc, (e, w)| {
                acc + e * c(*w, 0.0)
            });
        let full = u * inner * u.adjoint();
        (&full + full.adjoint()) * c(0.5, 0.0)
    };
    (
        assemble(&bc, &x.as_slice()[..bc.len()], uc),
        assemble(&bd, &x.as_slice()[bc.len()..], ud),
    )
}

/// Orthonormal basis of `range(u)` enlarged by the directions where the
/// first order conditions of the trace-one PSD problem fail at `m` with
/// gradient `g`: negative eigenvectors of `g − ⟨g, m⟩` on the complement
/// of `range(u)`, and the coupling of the complement to `range(u)`.
fn enlarged_face(g: &CMat, m: &CMat, u: &CMat) -> CMat {
    let dim = g.nrows();
    let noise = 1e-13 * (1.0 + g.norm());
    let perp = identity(dim) - u * u.adjoint();
    let shifted = g - identity(dim) * c(frob_inner(g, m), 0.0);
    let (values, vectors) = eigh(&(&perp * &shifted * &perp));
    let mut cols: Vec<CVec> = u.column_iter().map(|col| col.into_owned()).collect();
    cols.extend(
        (0..dim)
            .filter(|&j| values[j] < -noise)
            .map(|j| vectors.column(j).into_owned()),
    );
    let coupling = &perp * g * u;
    cols.extend(
        coupling
            .column_iter()
            .filter(|col| col.norm() > noise)
            .map(|col| col.into_owned()),
    );
    orthonormal_basis(&CMat::from_columns(&cols), 1e-10)
}

/// Active-set completion on the faces of `(c, d)`: exact solves on the
/// current faces, shrinking a face when its solution leaves the PSD cone
/// and enlarging it where the first order conditions fail. Near the optimum
/// the decrease left along missing directions is below the rounding level
/// of `F`, so this is driven by the conditions rather than by function
/// values. Returns the point of smallest gradient norm it visits.
fn active_set_polish(pair: &OrthoPair, cm: &CMat, dm: &CMat) -> (SpherePoint, f64) {
    const ROUNDS: usize = 12;
    const RANK_TOL: f64 = 1e-13;
    let (mut uc, mut ud) = (dominant_range(cm, RANK_TOL), dominant_range(dm, RANK_TOL));
    let (mut c_cur, mut d_cur) = (cm.clone(), dm.clone());
    let mut best: Option<(SpherePoint, f64)> = None;
    for _ in 0..ROUNDS {
        let (fc, fd) = face_solve(pair, &c_cur, &d_cur, &uc, &ud);
        let indefinite = eigh(&fc).0[0] < -RANK_TOL || eigh(&fd).0[0] < -RANK_TOL;
        let (pc, ac) = project_spectraplex(&fc);
        let (pd, ad) = project_spectraplex(&fd);
        let q = SpherePoint::from_parts_unchecked(ac, ad);
        let delta = delta_diag(pair, &q);
        let gnorm = gradient_with_delta(pair, &q, &delta).norm();
        if best.as_ref().is_none_or(|b| gnorm < b.1) {
            best = Some((q, gnorm));
        }
        if indefinite {
            uc = dominant_range(&pc, RANK_TOL);
            ud = dominant_range(&pd, RANK_TOL);
        } else {
            let gc = diag_congruence(pair.v(), &delta);
            let gd = diag_congruence(pair.w(), &delta) * c(-1.0, 0.0);
            let (nc, nd) = (enlarged_face(&gc, &pc, &uc), enlarged_face(&gd, &pd, &ud));
            if nc.ncols() == uc.ncols() && nd.ncols() == ud.ncols() {
                break;
            }
            uc = nc;
            ud = nd;
        }
        c_cur = pc;
        d_cur = pd;
    }
    best.expect("at least one round")
}

/// Newton direction `−H⁺ grad` at `p` with the exact Riemannian Hessian,
/// in the tangent projections of an orthonormal hermitian basis.
fn newton_direction(pair: &OrthoPair, p: &SpherePoint) -> Tangent {
    let (r, s) = (p.r(), p.s());
    let delta = delta_diag(pair, p);
    let (g, h) = compressed_delta(pair, &delta);
    let grad = gradient_with_delta(pair, p, &delta);
    let ga2 = frob_inner(&g, &(p.a() * p.a()));
    let hb2 = frob_inner(&h, &(p.b() * p.b()));

    let mut basis: Vec<Tangent> = hermitian_basis(r)
        .into_iter()
        .map(|e| Tangent {
            x: e,
            y: CMat::zeros(s, s),
        })
        .collect();
    basis.extend(hermitian_basis(s).into_iter().map(|e| Tangent {
        x: CMat::zeros(r, r),
        y: e,
    }));
    let basis: Vec<Tangent> = basis.iter().map(|t| t.projected(p)).collect();
    let jac: Vec<Vec<f64>> = basis
        .iter()
        .map(|t| {
            let dx = diag_of_congruence(pair.v(), &sym_product(p.a(), &t.x));
            let dy = diag_of_congruence(pair.w(), &sym_product(p.b(), &t.y));
            dx.iter().zip(&dy).map(|(u, v)| u - v).collect()
        })
        .collect();

    let m = basis.len();
    let mut hess = nalgebra::DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let (ti, tj) = (&basis[i], &basis[j]);
            let first: f64 = jac[i].iter().zip(&jac[j]).map(|(u, v)| u * v).sum();
            let second = frob_inner(&g, &(&ti.x * &tj.x))
                - ga2 * frob_inner(&ti.x, &tj.x)
                - frob_inner(&h, &(&ti.y * &tj.y))
                + hb2 * frob_inner(&ti.y, &tj.y);
            hess[(i, j)] = 2.0 * first + 4.0 * second;
            hess[(j, i)] = hess[(i, j)];
        }
    }
    let rhs = RVec::from_iterator(m, basis.iter().map(|t| -grad.inner(t)));
    let y = real_lstsq(&hess, &rhs);
    basis
        .iter()
        .zip(y.iter())
        .fold(Tangent::zeros(r, s), |acc, (t, w)| Tangent {
            x: acc.x + &t.x * c(*w, 0.0),
            y: acc.y + &t.y * c(*w, 0.0),
        })
        .projected(p)
}

/// Riemannian Newton steps in `(a, b)`. Where `a` or `b` is rank deficient
/// the minimizer sits off the face by an amount of the order of the
/// gradient, far above the rounding level of `a²`, so this finishes where
/// methods on `(a², b²)` stall. Steps must reduce the gradient norm without
/// raising `F` beyond rounding. Returns a positive point meeting `grad_tol`.
fn newton_polish(pair: &OrthoPair, start: &SpherePoint, grad_tol: f64) -> Option<SpherePoint> {
    const STEPS: usize = 8;
    let mut p = start.clone();
    let mut f = objective(pair, &p);
    let mut gnorm = gradient(pair, &p).norm();
    for _ in 0..STEPS {
        let q = retract_normalize(&p, &newton_direction(pair, &p));
        let (fq, gq) = (objective(pair, &q), gradient(pair, &q).norm());
        if !(gq < gnorm) || fq > f * (1.0 + 1e-10) + 1e-28 {
            return None;
        }
        (p, f, gnorm) = (q, fq, gq);
        if gnorm < grad_tol {
            let pos = positive_part(&p);
            return (gradient(pair, &pos).norm() < grad_tol).then_some(pos);
        }
    }
    None
}

/// Newton from the iterate, then from the best active-set point.
fn polish(
    pair: &OrthoPair,
    p: &SpherePoint,
    cm: &CMat,
    dm: &CMat,
    grad_tol: f64,
) -> Option<SpherePoint> {
    if let Some(q) = newton_polish(pair, p, grad_tol) {
        return Some(q);
    }
    let (q, gnorm) = active_set_polish(pair, cm, dm);
    if gnorm < grad_tol {
        return Some(q);
    }
    newton_polish(pair, &q, grad_tol)
}

fn trace_re(x: &CMat) -> f64 {
    (0..x.nrows()).map(|i| x[(i, i)].re).sum()
}

/// Projected gradient on `(c, d) = (a², b²)` over the product of trace-one
/// PSD sets, where `F` is a convex quadratic. Barzilai-Borwein steps with a
/// non-monotone sufficient-decrease safeguard over the last few values.
fn spectraplex_refinement(pair: &OrthoPair, cfg: &DescentConfig, start: SpherePoint) -> Phase {
    const MEMORY: usize = 10;
    const SUFFICIENT: f64 = 1e-4;
    const MAX_HALVINGS: usize = 40;
    const POLISH_EVERY: usize = 20;

    let mut cm = start.a() * start.a();
    let mut dm = start.b() * start.b();
    let mut p = start;
    let mut history: VecDeque<f64> = VecDeque::with_capacity(MEMORY);
    let mut prev: Option<(CMat, CMat, CMat, CMat)> = None;
    let mut t = 1.0;

    for it in 0..cfg.max_iters {
        let delta = delta_diag(pair, &p);
        let f: f64 = delta.iter().map(|d| d * d).sum();
        if gradient_with_delta(pair, &p, &delta).norm() < cfg.grad_tol {
            return Phase {
                point: p,
                iterations: it,
                converged: true,
            };
        }
        if it % POLISH_EVERY == 0 {
            if let Some(q) = polish(pair, &p, &cm, &dm, cfg.grad_tol) {
                return Phase {
                    point: q,
                    iterations: it,
                    converged: true,
                };
            }
        }
        if history.len() == MEMORY {
            history.pop_front();
        }
        history.push_back(f);
        let reference = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let gc = diag_congruence(pair.v(), &delta) * c(2.0, 0.0);
        let gd = diag_congruence(pair.w(), &delta) * c(-2.0, 0.0);
        if let Some((pc, pd, pgc, pgd)) = &prev {
            let (sc, sd) = (&cm - pc, &dm - pd);
            let (yc, yd) = (&gc - pgc, &gd - pgd);
            let sy = frob_inner(&sc, &yc) + frob_inner(&sd, &yd);
            let ss = frob_inner(&sc, &sc) + frob_inner(&sd, &sd);
            t = if sy > 1e-300 {
                (ss / sy).clamp(1e-6, 1e8)
            } else {
                1.0
            };
        }

        let mut accepted = None;
        let mut trial = t;
        for _ in 0..MAX_HALVINGS {
            let (nc, na) = project_spectraplex(&(&cm - &gc * c(trial, 0.0)));
            let (nd, nb) = project_spectraplex(&(&dm - &gd * c(trial, 0.0)));
            let q = SpherePoint::from_parts_unchecked(na, nb);
            let decrease = frob_inner(&gc, &(&cm - &nc)) + frob_inner(&gd, &(&dm - &nd));
            if objective(pair, &q) <= reference - SUFFICIENT * decrease {
                accepted = Some((nc, nd, q));
                break;
            }
            trial *= 0.5;
        }
        let Some((nc, nd, q)) = accepted else {
            return Phase {
                point: p,
                iterations: it,
                converged: false,
            };
        };
        prev = Some((
            std::mem::replace(&mut cm, nc),
            std::mem::replace(&mut dm, nd),
            gc,
            gd,
        ));
        p = q;
    }
    let converged = gradient(pair, &p).norm() < cfg.grad_tol;
    Phase {
        point: p,
        iterations: cfg.max_iters,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_pair;
    use crate::linalg::{frob_norm, hermitian_defect, random_isometry};

    fn col(entries: &[f64]) -> CMat {
        CMat::from_iterator(entries.len(), 1, entries.iter().map(|&x| c(x, 0.0)))
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let q = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(q.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn starts_are_positive_points_of_the_sphere() {
        let mut rng = restart_rng(5, 3);
        let p = random_start(4, 2, &mut rng);
        assert!((frob_norm(p.a()) - 1.0).abs() < 1e-14);
        assert!(eigh(p.a()).0[0] > 0.0);
        assert!(eigh(p.b()).0[0] > 0.0);
    }

    #[test]
    fn config_rejects_bad_step() {
        let cfg = DescentConfig {
            step: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = DescentConfig {
            step: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn one_dimensional_support_and_axes() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pair = validate_pair(&col(&[h, h]), &col(&[h, -h]), 1e-10).unwrap();
        let res = descend(&pair, &DescentConfig::default()).unwrap();
        assert!(res.delta < 1e-12);

        let pair = validate_pair(&col(&[1.0, 0.0, 0.0]), &col(&[0.0, 1.0, 0.0]), 1e-10).unwrap();
        let res = descend(&pair, &DescentConfig::default()).unwrap();
        assert!((res.delta - 2.0).abs() < 1e-14);
        assert!(res.converged);
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
    fn line_search_is_monotone() {
        let pair = random_pair(21, 6, 2, 2);
        let cfg = DescentConfig {
            line_search: true,
            max_iters: 1,
            refine: false,
            ..Default::default()
        };
        let mut rng = restart_rng(0, 0);
        let mut p = random_start(2, 2, &mut rng);
        for _ in 0..200 {
            let f0 = objective(&pair, &p);
            let next = descend_from(&pair, &cfg, &p).unwrap().minimizer;
            assert!(objective(&pair, &next) <= f0 + 1e-14);
            p = next;
        }
    }

    #[test]
    fn deterministic_and_converged() {
        let pair = random_pair(8, 6, 2, 3);
        let cfg = DescentConfig {
            restarts: 4,
            seed: 99,
            ..Default::default()
        };
        let a = descend(&pair, &cfg).unwrap();
        let b = descend(&pair, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.converged, "grad_norm {:.3e}", a.grad_norm);
        assert!(a.grad_norm < cfg.grad_tol);
        assert!((a.delta - objective(&pair, &a.minimizer)).abs() < 1e-14);
        assert!(a.lambda >= a.mu);
    }

    #[test]
    fn refinement_reaches_tolerance_on_a_support() {
        // Rank deficient support minimizers make the modulus iteration
        // sublinear; the refinement phase must still converge.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = CMat::from_row_slice(
            3,
            2,
            &[
                c(h, 0.0),
                c(0.0, 0.0),
                c(h, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
            ],
        );
        let pair = validate_pair(&v, &col(&[h, -h, 0.0]), 1e-10).unwrap();
        let cfg = DescentConfig {
            restarts: 2,
            max_iters: 200,
            ..Default::default()
        };
        let res = descend(&pair, &cfg).unwrap();
        assert!(res.converged, "grad_norm {:.3e}", res.grad_norm);
        assert!(
            res.delta < 1e-12,
            "delta {:.3e} refined {} iters {}",
            res.delta,
            res.refined,
            res.iterations
        );
    }
    #[test]
    fn hermitian_basis_is_orthonormal() {
        let basis = hermitian_basis(3);
        assert_eq!(basis.len(), 9);
        for (i, x) in basis.iter().enumerate() {
            assert!(hermitian_defect(x) == 0.0);
            for (j, y) in basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((frob_inner(x, y) - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn spectraplex_projection_drops_rounding_eigenvalues() {
        let x = crate::linalg::real_diag(&[1.0, 1e-17, 0.0]);
        let (cm, root) = project_spectraplex(&x);
        assert_eq!(cm[(1, 1)].re, 0.0);
        assert_eq!(root[(1, 1)].re, 0.0);
        assert!((trace_re(&cm) - 1.0).abs() < 1e-15);
        let (cm, _) = project_spectraplex(&crate::linalg::real_diag(&[0.9, 0.4, -0.3]));
        let expected = [0.75, 0.25, 0.0];
        assert!((0..3).all(|i| (cm[(i, i)].re - expected[i]).abs() < 1e-15));
    }

    #[test]
    fn polish_finishes_a_rank_deficient_minimizer() {
        // A point on a generic curve through a composed support, where the
        // modulus iteration alone stalls above the gradient tolerance.
        use crate::constructions::{block_compose, SweepSpec};
        let comp = block_compose(1, 1, 0).unwrap();
        let g = random_hermitian(comp.pair.n(), &mut ChaCha8Rng::seed_from_u64(9));
        let pair = SweepSpec::new(comp.pair, g, 0.01, 650)
            .unwrap()
            .pair_at(6.0)
            .unwrap();
        let cfg = DescentConfig {
            seed: 9,
            refine: false,
            ..Default::default()
        };
        let res = descend(&pair, &cfg).unwrap();
        assert!(!res.converged, "grad_norm {:.3e}", res.grad_norm);
        let (cm, dm) = (
            res.minimizer.a() * res.minimizer.a(),
            res.minimizer.b() * res.minimizer.b(),
        );
        let q = polish(&pair, &res.minimizer, &cm, &dm, cfg.grad_tol).expect("polish failed");
        assert!(gradient(&pair, &q).norm() < cfg.grad_tol);
        assert!(objective(&pair, &q) <= res.delta * (1.0 + 1e-8) + 1e-28);
    }
}
