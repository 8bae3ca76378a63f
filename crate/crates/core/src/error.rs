use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The linear chain is below its (finite- or infinite-N) critical point.
    #[error("linear chain unstable: {0}")]
    UnstableLinearPhase(String),

    /// A mode frequency vanished where a finite frequency is required.
    #[error("soft-mode singularity: {0}")]
    SoftModeSingularity(String),

    #[error("unstable configuration: {0}")]
    UnstableConfiguration(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ChainError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        ChainError::InvalidParameter(msg.into())
    }

    /// Short name of the variant, used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            ChainError::InvalidParameter(_) => "InvalidParameter",
            ChainError::UnstableLinearPhase(_) => "UnstableLinearPhase",
            ChainError::SoftModeSingularity(_) => "SoftModeSingularity",
            ChainError::UnstableConfiguration(_) => "UnstableConfiguration",
            ChainError::NumericalFailure(_) => "NumericalFailure",
            ChainError::Unsupported(_) => "Unsupported",
            ChainError::ResourceLimit(_) => "ResourceLimit",
            ChainError::Io(_) => "Io",
        }
    }
}

pub type Result<T, E = ChainError> = std::result::Result<T, E>;
