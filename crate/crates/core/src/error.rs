use crate::domain::SurfacePoint;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("point z={} lies outside the domain", .0.z)]
    OutsideDomain(SurfacePoint),

    #[error("not an immersion: normalized margin {margin:e} at z={}", .witness.z)]
    NotImmersion { witness: SurfacePoint, margin: f64 },

    #[error("quadrature did not converge: {0}")]
    NonConvergent(String),

    #[error("surface density tail does not decay towards rho={rho}")]
    TailNotDecaying { rho: f64 },

    #[error("branch tracking failed near z={z}")]
    BranchTrackingFailed { z: num_complex::Complex64 },

    #[error("path does not close on the surface (mismatch {mismatch:e})")]
    PathNotClosed { mismatch: f64 },

    #[error("limit normal does not converge (spread {spread:e})")]
    LimitNormalDiverges { spread: f64 },

    #[error("pole order exceeds the extracted Laurent range (k_min = {k_min})")]
    OrderOutOfRange { k_min: i32 },

    #[error("no root in bracket: {0}")]
    NoRoot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameters(_) | Error::OutsideDomain(_) | Error::Json(_) => 2,
            Error::NonConvergent(_)
            | Error::TailNotDecaying { .. }
            | Error::BranchTrackingFailed { .. }
            | Error::PathNotClosed { .. }
            | Error::OrderOutOfRange { .. }
            | Error::NoRoot(_) => 3,
            Error::Io(_) => 4,
            Error::NotImmersion { .. } | Error::LimitNormalDiverges { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
