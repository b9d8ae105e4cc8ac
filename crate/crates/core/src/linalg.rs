//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here works on `nalgebra` dynamic matrices over `Complex<f64>`.
//! Hermitian functional calculus (absolute value, square roots, exponentials)
//! goes through a single sorted eigendecomposition helper.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type RVec = DVector<f64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real part of the trace inner product `tr(x* y)`.
pub fn frob_inner(x: &CMat, y: &CMat) -> f64 {
    debug_assert_eq!(x.shape(), y.shape());
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

pub fn frob_norm(x: &CMat) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(x: &CMat) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(x: &CMat) -> CMat {
    (x + x.adjoint()) * c(0.5, 0.0)
}

/// Largest entry modulus of `x - x*`.
pub fn hermitian_defect(x: &CMat) -> f64 {
    if !x.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(x - x.adjoint()))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn real_diag(d: &[f64]) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(
        d.len(),
        d.iter().map(|&x| c(x, 0.0)),
    ))
}

/// `m* diag(d) m` without forming the diagonal matrix.
pub fn diag_congruence(m: &CMat, d: &[f64]) -> CMat {
    debug_assert_eq!(m.nrows(), d.len());
    let mut scaled = m.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= c(d[i], 0.0);
    }
    m.adjoint() * scaled
}

/// Row-wise squared moduli: the diagonal of `m m*`.
pub fn row_sq_norms(m: &CMat) -> Vec<f64> {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
        .collect()
}

/// Eigendecomposition of a hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first so tiny asymmetries from rounding do not
/// leak into the decomposition.
pub fn eigh(x: &CMat) -> (Vec<f64>, CMat) {
    let n = x.nrows();
    assert!(x.is_square(), "eigh needs a square matrix");
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = hermitian_part(x).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Applies a real function to the spectrum of a hermitian matrix.
pub fn hermitian_map(x: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (values, vectors) = eigh(x);
    reassemble(&vectors, values.iter().map(|&v| c(f(v), 0.0)))
}

fn reassemble(vectors: &CMat, spectrum: impl Iterator<Item = Complex64>) -> CMat {
    let mut scaled = vectors.clone();
    for (j, lam) in spectrum.enumerate() {
        let mut col = scaled.column_mut(j);
        col *= lam;
    }
    scaled * vectors.adjoint()
}

/// `|x| = (x^2)^{1/2}` for hermitian `x`.
pub fn herm_abs(x: &CMat) -> CMat {
    hermitian_part(&hermitian_map(x, f64::abs))
}

/// Positive square root of a (numerically) positive semidefinite matrix;
/// negative rounding noise in the spectrum is clamped to zero.
pub fn psd_sqrt(x: &CMat) -> CMat {
    hermitian_part(&hermitian_map(x, |v| v.max(0.0).sqrt()))
}

/// `exp(i t A)` for hermitian `A`; unitary by construction.
pub fn exp_i_hermitian(a: &CMat, t: f64) -> CMat {
    let (values, vectors) = eigh(a);
    reassemble(
        &vectors,
        values.iter().map(|&v| Complex64::from_polar(1.0, t * v)),
    )
}

/// `exp(h)` for anti-hermitian `h`.
pub fn exp_antihermitian(h: &CMat) -> CMat {
    // h = i k with k = -i h hermitian.
    let k = h * c(0.0, -1.0);
    exp_i_hermitian(&k, 1.0)
}

/// Spectral norm of a hermitian matrix (largest eigenvalue modulus).
pub fn hermitian_spectral_norm(x: &CMat) -> f64 {
    eigh(x).0.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Spectral norm of an arbitrary matrix via its singular values.
pub fn spectral_norm(x: &CMat) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.singular_values().iter().fold(0.0, |m, &v| m.max(v))
}

/// Thin SVD with singular values sorted descending: `(u, s)` where the
/// columns of `u` are the matching left singular vectors.
pub fn left_svd(m: &CMat) -> (CMat, Vec<f64>) {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut u_sorted = CMat::zeros(m.nrows(), k);
    let mut s_sorted = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        s_sorted.push(svd.singular_values[src]);
    }
    (u_sorted, s_sorted)
}

/// Orthonormal basis of the column space, keeping singular directions with
/// `s > rel_tol * s_max`.
pub fn orthonormal_basis(m: &CMat, rel_tol: f64) -> CMat {
    let (u, s) = left_svd(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = s
        .iter()
        .take_while(|&&v| v > rel_tol * smax && v > 0.0)
        .count();
    u.columns(0, rank).into_owned()
}

/// Orthogonal projector `q q*` onto the range of an isometry `q`.
pub fn projector(q: &CMat) -> CMat {
    q * q.adjoint()
}

/// Entries i.i.d. standard complex normal, `(x + i y)/sqrt(2)`.
pub fn random_complex_normal<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re * scale, im * scale)
    })
}

/// Hermitian part of a complex Ginibre matrix.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    hermitian_part(&random_complex_normal(n, n, rng))
}

/// Random anti-hermitian matrix with unit Frobenius norm.
pub fn random_antihermitian_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let z = random_complex_normal(n, n, rng);
    let h = (&z - z.adjoint()) * c(0.5, 0.0);
    let norm = frob_norm(&h);
    h / c(norm, 0.0)
}

/// Random isometry `n x k`: orthonormalized Ginibre columns.
pub fn random_isometry<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> CMat {
    orthonormal_basis(&random_complex_normal(n, k, rng), 1e-12)
}

/// Real matrix determinant and linear solve via LU. Returns `None` for the
/// solution when the factorization is exactly singular.
pub fn real_det_solve(m: &DMatrix<f64>, rhs: &RVec) -> (f64, Option<RVec>) {
    let lu = m.clone().lu();
    let det = lu.determinant();
    (det, lu.solve(rhs))
}

/// Least-squares solution through the pseudo-inverse (for singular systems).
pub fn real_lstsq(m: &DMatrix<f64>, rhs: &RVec) -> RVec {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    svd.solve(rhs, smax * 1e-14)
        .unwrap_or_else(|_| RVec::zeros(m.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigh_reconstructs_and_sorts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..7 {
            let h = random_hermitian(n, &mut rng);
            let (vals, vecs) = eigh(&h);
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            let rebuilt = hermitian_map(&h, |v| v);
            assert!(max_abs(&(rebuilt - &h)) < 1e-12);
            let unit = vecs.adjoint() * &vecs - identity(n);
            assert!(max_abs(&unit) < 1e-12);
        }
    }

    #[test]
    fn herm_abs_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(5, &mut rng);
        let a = herm_abs(&h);
        assert!(max_abs(&(&a * &a - &h * &h)) < 1e-12);
        assert!(eigh(&a).0[0] > -1e-14);
    }

    #[test]
    fn exponential_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_antihermitian_unit(6, &mut rng);
        let q = exp_antihermitian(&(h * c(0.3, 0.0)));
        assert!(frob_norm(&(q.adjoint() * &q - identity(6))) < 1e-12);
        let zero = exp_antihermitian(&CMat::zeros(4, 4));
        assert!(max_abs(&(zero - identity(4))) < 1e-15);
    }

    #[test]
    fn basis_rank_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_complex_normal(6, 2, &mut rng);
        let m = CMat::from_fn(6, 3, |i, j| {
            if j < 2 {
                a[(i, j)]
            } else {
                a[(i, 0)] + a[(i, 1)]
            }
        });
        let q = orthonormal_basis(&m, 1e-11);
        assert_eq!(q.ncols(), 2);
        assert!(max_abs(&(q.adjoint() * &q - identity(2))) < 1e-12);
    }
}
