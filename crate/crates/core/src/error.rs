use thiserror::Error;

/// Errors raised by geometry construction and curvature evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("fractional order must lie strictly inside (0, 1), got {0}")]
    InvalidOrder(f64),
    #[error("ambient dimension n must be at least 1, got {0}")]
    InvalidDimension(usize),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),
    #[error("profile is not differentiable at r = {r}")]
    NonSmoothPoint { r: f64 },
    #[error("point is not on the boundary of the body: {0}")]
    InvalidPoint(String),
    #[error("sets overlap inside the integration box at {point:?}")]
    DisjointnessViolation { point: Vec<f64> },
    #[error("cutoff is not C2: second difference jumps by {jump:e} near r = {r}")]
    InvalidCutoff { r: f64, jump: f64 },
    #[error("cone curvature is not homogeneous: residual {residual:e} exceeds allowance {allowed:e}")]
    HomogeneityViolation { residual: f64, allowed: f64 },
    #[error("envelope is not sublinear on [0, {r_max}]: phi(r) - {delta} r still increases at the grid edge")]
    NotSublinear { delta: f64, r_max: f64 },
    #[error("candidate is not contained in the starting barrier F_{eps}: excess {excess:e} at r = {r}")]
    InitialInclusion { eps: f64, r: f64, excess: f64 },
    #[error("flatness parameter must lie in (0, 1/4), got {0}")]
    InvalidEpsilon(f64),
    #[error("Hölder exponent must lie in (0, 1), got {0}")]
    InvalidExponent(f64),
    #[error("profile data: {0}")]
    ProfileData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
