use thiserror::Error;

#[derive(Debug, Error)]
pub enum DspError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("autocorrelation sequence is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("root finder did not converge (best residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("frame {frame}: {reason}")]
    FrameAnalysis { frame: usize, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
}
