use thiserror::Error;

use crate::geometry::Face;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({x}, {y}) does not lie on face {face:?}")]
    NotOnFace { x: f64, y: f64, face: Face },

    #[error("minimum point separation {found:e} is below tolerance {tolerance:e}")]
    SeparationTooSmall { found: f64, tolerance: f64 },

    #[error("kernel derivative of order {order} is singular at r = 0")]
    SingularAtOrigin { order: usize },

    #[error("derivative order {requested} exceeds the kernel limit {available}")]
    DerivativeOrder { requested: usize, available: usize },

    #[error("no radial fundamental solution for operator `{0}`; use a composed psi_v kernel")]
    CatalogueMiss(String),

    #[error("augmentation exponent {given} too small; the product needs at least {required}")]
    InsufficientAugmentation { given: u32, required: u32 },

    #[error("kernel needs the source point (source-weighted family)")]
    SourceRequired,

    #[error("row budget: {rows} rows for {cols} columns in {mode} mode")]
    RowBudget { rows: usize, cols: usize, mode: &'static str },

    #[error("singular system (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("singular Jacobian at Newton iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("Newton iteration diverged at iteration {iteration} (residual {residual:e})")]
    Divergence { iteration: usize, residual: f64 },

    #[error("sweep failed for every N: {0}")]
    SweepFailed(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Errors caused by bad input rather than by a failing solve.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidDomain(_)
                | Error::InvalidArgument(_)
                | Error::NotOnFace { .. }
                | Error::SeparationTooSmall { .. }
                | Error::DerivativeOrder { .. }
                | Error::CatalogueMiss(_)
                | Error::InsufficientAugmentation { .. }
                | Error::SourceRequired
                | Error::RowBudget { .. }
                | Error::Config(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
