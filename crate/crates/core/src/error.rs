use thiserror::Error;

use crate::dynamics::BallEnumeration;

#[derive(Debug, Error)]
pub enum KlabError {
    #[error("zero vector has no projective class")]
    ZeroVector,
    #[error("points coincide (Fubini-Study distance {0:e})")]
    CoincidentPoints(f64),
    #[error("lines coincide (dual distance {0:e})")]
    CoincidentLines(f64),
    #[error("matrix is singular (|det| = {0:e})")]
    SingularMatrix(f64),
    #[error("zero matrix")]
    ZeroMatrix,
    #[error("eigendecomposition ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),
    #[error("operation undefined on the identity element")]
    IdentityElement,
    #[error("elliptic elements are not supported by the closed-form cyclic limit set")]
    EllipticUnsupported,
    #[error("point lies in the kernel of the pseudo-projective map")]
    InKernel,
    #[error("word ball exceeded cap of {cap} elements at radius {radius}")]
    CapExceeded {
        cap: usize,
        radius: usize,
        partial: Box<BallEnumeration>,
    },
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, KlabError>;
