//! Loss, optimizer, metrics, data splitting, the training loop, and
//! saliency-map computation for the formant regression network.

mod adam;
mod error;
mod loss;
mod metrics;
mod saliency;
mod split;
mod trainer;

pub use adam::AdamState;
pub use error::{Result, TrainError};
pub use loss::{mae_joint, mae_loss};
pub use metrics::{mean_r_squared, r_squared};
pub use saliency::{compute_saliency, SaliencyMode};
pub use split::{split_dataset, SplitSpec};
pub use trainer::{
    assemble_batch, evaluate, fit_normalization, history_to_csv, train_loop, EpochRecord,
    EvalReport, SamplePrediction, TrainConfig,
};
