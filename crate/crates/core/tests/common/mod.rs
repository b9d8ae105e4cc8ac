#![allow(dead_code)]

use minsupport::adequacy::Tangent;
use minsupport::domain::{validate_pair, OrthoPair, SpherePoint};
use minsupport::linalg::{random_hermitian, random_isometry, CMat};
use rand::Rng;

/// Orthogonal pair of dimensions `(r, s)` from the columns of a random
/// isometry of `C^n`.
pub fn random_pair<R: Rng + ?Sized>(n: usize, r: usize, s: usize, rng: &mut R) -> OrthoPair {
    let u = random_isometry(n, r + s, rng);
    let v = u.columns(0, r).into_owned();
    let w = u.columns(r, s).into_owned();
    validate_pair(&v, &w, 1e-10).expect("columns of an isometry")
}

/// Random `(n, r, s)` with `2 ≤ n ≤ max_n` and `r + s ≤ n`.
pub fn random_dims<R: Rng + ?Sized>(max_n: usize, rng: &mut R) -> (usize, usize, usize) {
    let n = rng.random_range(2..=max_n);
    let r = rng.random_range(1..n);
    let s = rng.random_range(1..=n - r);
    (n, r, s)
}

/// As [`random_dims`] but excluding `r = s = 1`, where the tangent space of
/// the spheres is trivial.
pub fn random_dims_with_tangents<R: Rng + ?Sized>(
    max_n: usize,
    rng: &mut R,
) -> (usize, usize, usize) {
    loop {
        let dims = random_dims(max_n, rng);
        if dims.1 + dims.2 > 2 {
            return dims;
        }
    }
}

/// Point of the spheres with indefinite hermitian coordinates.
pub fn random_point<R: Rng + ?Sized>(r: usize, s: usize, rng: &mut R) -> SpherePoint {
    SpherePoint::normalized(&random_hermitian(r, rng), &random_hermitian(s, rng)).unwrap()
}

/// Unit tangent vector at `p`; needs a nontrivial tangent space.
pub fn random_tangent<R: Rng + ?Sized>(p: &SpherePoint, rng: &mut R) -> Tangent {
    let t = Tangent {
        x: random_hermitian(p.r(), rng),
        y: random_hermitian(p.s(), rng),
    }
    .projected(p);
    let norm = t.norm();
    t.scaled(1.0 / norm)
}

/// `D` diagonal unitary with random phases.
pub fn random_diagonal_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let phases: Vec<_> = (0..n)
        .map(|_| {
            num_complex::Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    CMat::from_diagonal(&nalgebra::DVector::from_vec(phases))
}

/// Permutation matrix of a random shuffle.
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut p = CMat::zeros(n, n);
    for (i, &j) in idx.iter().enumerate() {
        p[(i, j)] = num_complex::Complex64::new(1.0, 0.0);
    }
    p
}
