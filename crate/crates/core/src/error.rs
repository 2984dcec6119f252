use thiserror::Error;

use crate::field::GenericityViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("curve is not regular near t = {t:.6} (|dα/dt| = {speed:.3e})")]
    Regularity { t: f64, speed: f64 },

    #[error("curvature changes sign (k({t_neg:.6}) < 0 < k({t_pos:.6}))")]
    CurvatureSign { t_neg: f64, t_pos: f64 },

    #[error("curvature is constant: vertices and evolute cusps are undefined")]
    CircleDegeneracy,

    #[error("degree could not be resolved: {0}")]
    DegreeResolution(String),

    #[error("loop vector vanishes at t = {t:.9}")]
    ZeroVector { t: f64 },

    #[error("direction {direction:.9} is not a regular value")]
    NonRegularValue { direction: f64 },

    #[error("point lies on the loop image (distance {distance:.3e} at t = {t:.9})")]
    PointOnCurve { t: f64, distance: f64 },

    #[error("point lies on the surface image (distance {distance:.3e})")]
    PointOnSurface { distance: f64 },

    #[error("query point is not in generic position: {0}")]
    Genericity(GenericityViolation),

    #[error(
        "degenerate critical point at t = {t:.9}, rho = {rho:.9} (1 - rho k = {jacobian:.3e})"
    )]
    DegenerateCriticalPoint { t: f64, rho: f64, jacobian: f64 },

    #[error("degenerate surface critical point at {location:?}, rho = {rho:.9} (det Hessian = {det:.3e})")]
    DegenerateSurfaceCriticalPoint {
        location: [f64; 3],
        rho: f64,
        det: f64,
    },

    #[error("fold point at t = {t:.9} is a vertex (dk/ds = {kdot:.3e}); the pair expansion does not apply")]
    VertexDegeneracy { t: f64, kdot: f64 },

    #[error("matrix formula disagrees with independent numerics: {0}")]
    MatrixMismatch(String),

    #[error("surface is not strictly convex near {location:?} (k1 = {k1:.3e})")]
    Convexity { location: [f64; 3], k1: f64 },

    #[error("surface is not regular near {location:?} (|σ_u × σ_v| = {jacobian:.3e})")]
    SurfaceRegularity { location: [f64; 3], jacobian: f64 },

    #[error("surface is totally umbilic")]
    TotallyUmbilic,

    #[error("identity check failed: {0}")]
    IdentityMismatch(String),
}

impl Error {
    /// True for failures that indicate a violated mathematical identity
    /// rather than bad input.
    pub fn is_identity_failure(&self) -> bool {
        matches!(self, Error::MatrixMismatch(_) | Error::IdentityMismatch(_))
    }
}
