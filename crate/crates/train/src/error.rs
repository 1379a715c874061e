use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error(transparent)]
    Nn(#[from] u2s_nn::NnError),
    #[error(transparent)]
    Model(#[from] u2s_model::ModelError),
    #[error(transparent)]
    Data(#[from] u2s_data::DataError),
    #[error(transparent)]
    Dsp(#[from] u2s_dsp::DspError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TrainError>;
