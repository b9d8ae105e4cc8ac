use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("columns are not orthonormal (max deviation {deviation:.3e} >= {tol:.1e})")]
    NotOrthonormal { deviation: f64, tol: f64 },

    #[error("ranges are not orthogonal (max |V*W| = {deviation:.3e} >= {tol:.1e})")]
    RangesNotOrthogonal { deviation: f64, tol: f64 },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("point is not on the sphere: {0}")]
    NotOnSphere(String),

    #[error("input is numerically zero")]
    ZeroInput,

    #[error("coefficient {index} is not positive ({value:.3e})")]
    NonpositiveCoefficient { index: usize, value: f64 },

    #[error("point is not critical (residuals {res_a:.3e}, {res_b:.3e} exceed {tol:.1e})")]
    NotCritical { res_a: f64, res_b: f64, tol: f64 },

    #[error("pair is not certified as a support: {0}")]
    NotASupport(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("block composition is empty (h = k = l = 0)")]
    EmptyComposition,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
