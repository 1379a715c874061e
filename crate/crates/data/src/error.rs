use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("bad magic bytes, not a dataset file")]
    BadMagic,
    #[error("file truncated: {0}")]
    Truncated(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Dsp(#[from] u2s_dsp::DspError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DataError>;
