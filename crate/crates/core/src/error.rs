use thiserror::Error;

/// Errors raised by the curvature algebra, quadrature and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),
    #[error("vector is not unit length (|u| = {0})")]
    Normalization(f64),
    #[error("hypothesis violated: residual {residual:.3e} exceeds allowance {allowed:.3e}")]
    HypothesisViolation { residual: f64, allowed: f64 },
    #[error("curvature constant must be positive, got k = {0}")]
    KSign(f64),
    #[error("quadrature resolution too small: {0}")]
    Resolution(String),
    #[error("codimension outside 2 <= p <= n/2 (n = {n}, p = {p})")]
    Codimension { n: usize, p: usize },
    #[error("integration region carries no mass (psi = 0)")]
    DegenerateRegion,
    #[error("scalar-curvature constraint |sc| >= delta^2 |beta|^2 violated ({sc:.6e} vs {bound:.6e})")]
    Constraint { sc: f64, bound: f64 },
    #[error("no admissible form found: {0}")]
    EmptyDomain(String),
    #[error("parameter condition violated: {0}")]
    Condition(String),
    #[error("sequence pattern rejected: {0}")]
    Pattern(String),
    #[error("sign condition violated: {0}")]
    Sign(String),
    #[error("second fundamental form vanishes at this point")]
    DegeneratePoint,
    #[error("direction is not generic: {0}")]
    Genericity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
