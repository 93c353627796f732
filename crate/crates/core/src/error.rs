use num_complex::Complex64;
use thiserror::Error;

use crate::specials::Branch;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad error classes, used by front ends to map errors onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Numeric,
    Resource,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lambert_w: x = {x} is outside the domain of the {branch:?} branch")]
    LambertDomain { x: f64, branch: Branch },

    #[error("dilog: x = {0} > 1 (complex continuation is not supported)")]
    DilogDomain(f64),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("|z| = {modulus} exceeds the validity radius {radius} of the sample")]
    OutOfDomain { modulus: f64, radius: f64 },

    #[error("{what} needs {required}, above the cap {cap}")]
    Resource {
        what: &'static str,
        required: u64,
        cap: u64,
    },

    #[error("unreliable contour: min |f| = {min_modulus:e} is below the threshold {threshold:e}")]
    UnreliableContour { min_modulus: f64, threshold: f64 },

    #[error("{what} did not converge after {iterations} steps")]
    NonConvergent { what: &'static str, iterations: usize },

    #[error("root {root} lies within 1e-9 of the contour |z| = {radius}")]
    BoundaryAmbiguous { root: Complex64, radius: f64 },

    #[error("degenerate spectrum: eigenvalue {index} = {value:e}")]
    DegenerateSpectrum { index: usize, value: f64 },

    #[error("numeric range exceeded in {0}")]
    NumericRange(&'static str),

    #[error("tilt equation for threshold {threshold} has no root in [{lo}, {hi}]")]
    TiltInfeasible { threshold: u64, lo: f64, hi: f64 },

    #[error("certificate for m = {m} failed: margin {margin:e} at z = {point} ({reason})")]
    CertificateFailed {
        m: usize,
        margin: f64,
        point: Complex64,
        reason: &'static str,
    },

    #[error("experiment aborted: {unreliable} of {trials} replicates unreliable after resampling")]
    ExperimentAborted { unreliable: u64, trials: u64 },

    #[error("internal consistency violated: {0}")]
    InternalConsistency(&'static str),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::LambertDomain { .. }
            | Error::DilogDomain(_)
            | Error::InvalidParameter { .. }
            | Error::OutOfDomain { .. } => ErrorKind::Usage,
            Error::Resource { .. } => ErrorKind::Resource,
            _ => ErrorKind::Numeric,
        }
    }
}

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
