use num_complex::Complex64;
use thiserror::Error;

use crate::ode::OdeError;

pub type Result<T, E = QnmError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QnmError {
    #[error("parameters outside admissible regime: {0}")]
    Inadmissible(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contour pinches horizon near r = {r}")]
    ContourPinch { r: Complex64 },
    #[error("continuation invalid: use scaled method (lambda = {lambda}: {reason})")]
    OutsideValidity { lambda: Complex64, reason: String },
    #[error("propagation failed at x = {x}: {source}")]
    Propagation {
        x: Complex64,
        #[source]
        source: OdeError,
    },
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("no zero near seed {seed}")]
    NoZeroNearSeed { seed: Complex64 },
    #[error("zero too close to the rectangle boundary after {nudges} nudges")]
    ZeroOnBoundary { nudges: usize },
    #[error("unresolved scaled window, unstable eigenvalues: {0:?}")]
    UnresolvedWindow(Vec<Complex64>),
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
    #[error("CFL violated: dt = {dt} exceeds dx = {dx}")]
    Cfl { dt: f64, dx: f64 },
    #[error("non-finite field at t = {t} (first bad cell {cell})")]
    NonFinite { t: f64, cell: usize },
    #[error("lambda = {lambda} is (near) a resonance: |W| = {wronskian_abs}")]
    NearResonance { lambda: Complex64, wronskian_abs: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
