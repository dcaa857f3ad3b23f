use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("metric realized at N={requested} but declares N={declared}")]
    SizeMismatch { declared: usize, requested: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("w={re}{im:+}i lies on the support of the metric density")]
    OnSupport { re: f64, im: f64 },
    #[error("w={re}{im:+}i is outside the domain of validity: {reason}")]
    OutsideDomain { re: f64, im: f64, reason: String },
    #[error("root continuation hit a near-collision at w={re}{im:+}i (separation {separation:e})")]
    BranchCollision { re: f64, im: f64, separation: f64 },
    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,
    #[error("non-holomorphic Newton solve diverged at w={re}{im:+}i (best residual {residual:e})")]
    NewtonDivergence { re: f64, im: f64, residual: f64 },
    #[error("neither phase resolved w={re}{im:+}i: holomorphic: {holomorphic}; non-holomorphic residual {nonholomorphic_residual:e}")]
    Unresolved {
        re: f64,
        im: f64,
        holomorphic: String,
        nonholomorphic_residual: f64,
    },
    #[error("finite-difference stencil at ({re},{im}) straddles the phase boundary")]
    BoundaryStencil { re: f64, im: f64 },
    #[error("curve is not closed: {0}")]
    OpenCurve(String),
    #[error("ill-conditioned shift (condition estimate {0:e})")]
    IllConditioned(f64),
    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
