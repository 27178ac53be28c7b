use thiserror::Error;

use crate::group::ElementId;

/// Errors raised by matrix arithmetic, group construction and certification.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },

    #[error("matrix is singular over Z_{modulus} (det = {det})")]
    Singular { det: u32, modulus: u32 },

    #[error("invalid structure: {0}")]
    Structural(String),

    #[error("capacity of {cap} elements exceeded ({found} elements found so far)")]
    Capacity { found: usize, cap: usize },

    #[error("integrity failure at element {element}: {reason}")]
    Integrity { element: ElementId, reason: String },

    #[error("character twist unsupported: {0}")]
    UnsupportedTwist(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short stable tag used in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } | Error::ModulusMismatch { .. } => "structural",
            Error::Singular { .. } => "singular",
            Error::Structural(_) => "structural",
            Error::Capacity { .. } => "capacity",
            Error::Integrity { .. } => "integrity",
            Error::UnsupportedTwist(_) => "unsupported-twist",
            Error::Precondition(_) => "precondition",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
