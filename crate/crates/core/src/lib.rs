//! Supports of minimal hermitian matrices: moment algebra, the adequacy
//! obstruction `δ(V, W)` and constructions of certified supports.

// `!(x > tol)` is used throughout so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adequacy;
pub mod cli;
pub mod constructions;
pub mod domain;
pub mod error;
pub mod linalg;
pub mod moment;
pub mod oracle;
pub mod rank_one;

pub use error::{Error, Result};
