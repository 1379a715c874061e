use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Nn(#[from] u2s_nn::NnError),
    #[error("checkpoint has bad magic")]
    BadMagic,
    #[error("checkpoint version {0} not supported")]
    VersionMismatch(u32),
    #[error("checkpoint truncated")]
    Truncated,
    #[error("checkpoint corrupt: {0}")]
    Corrupt(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
