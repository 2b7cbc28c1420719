use thiserror::Error;

/// Errors produced by every stage of the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("rasterized set is empty: {0}")]
    EmptyMask(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("connectivity error: {0}")]
    Connectivity(String),

    #[error("construction error at layer {layer}: {reason}")]
    Construction { layer: usize, reason: String },

    #[error("witness not applicable: {0}")]
    WitnessInapplicable(String),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag, used by the CLI's structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter { .. } => "parameter",
            Error::EmptyMask(_) => "empty_mask",
            Error::Geometry(_) => "geometry",
            Error::Connectivity(_) => "connectivity",
            Error::Construction { .. } => "construction",
            Error::WitnessInapplicable(_) => "witness_inapplicable",
            Error::Format(_) => "format",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
