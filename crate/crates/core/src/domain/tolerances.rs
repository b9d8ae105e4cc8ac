use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by validation and certification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub ortho_tol: f64,
    pub sphere_tol: f64,
    pub hermitian_tol: f64,
    pub moment_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ortho_tol: 1e-10,
            sphere_tol: 1e-10,
            hermitian_tol: 1e-12,
            moment_tol: 1e-13,
        }
    }
}
