//! Domain types: validated complex matrices, orthogonal subspace pairs,
//! moments and points of the product of matrix spheres.

mod matrix;
mod moment;
mod pair;
mod sphere;
mod tolerances;

pub use matrix::ComplexMatrix;
pub use moment::{hadamard_square, MomentVector};
pub use pair::{validate_pair, OrthoPair, PairFile};
pub use sphere::{SpherePoint, SpherePointFile};
pub use tolerances::Tolerances;
