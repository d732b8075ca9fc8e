use thiserror::Error;

use crate::basis::BasisError;
use crate::compression::CompressionError;
use crate::io::IoError;
use crate::linalg::LinalgError;
use crate::recovery::RecoveryError;
use crate::transform::TransformError;
use crate::uncertainty::UncertaintyError;

/// Any error raised by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("linalg: {0}")]
    Linalg(#[from] LinalgError),
    #[error("basis: {0}")]
    Basis(#[from] BasisError),
    #[error("transform: {0}")]
    Transform(#[from] TransformError),
    #[error("uncertainty: {0}")]
    Uncertainty(#[from] UncertaintyError),
    #[error("recovery: {0}")]
    Recovery(#[from] RecoveryError),
    #[error("compression: {0}")]
    Compression(#[from] CompressionError),
    #[error("io: {0}")]
    Io(#[from] IoError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
