//! Ultra2Formant network assembly.
//!
//! Builds the layer graph (pointwise conv, hybrid branch layer, channel
//! shuffle, grouped conv, dual linear heads) from `u2s-nn` kernels,
//! covers every ablation variant, and serializes checkpoints bit-exactly.

mod checkpoint;
mod config;
mod error;
mod net;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use config::{ShapePlan, TargetNorm, U2fConfig, SHUFFLE_GROUPS};
pub use error::ModelError;
pub use net::{BackwardArtifacts, ForwardTape, U2fModel};

pub type Result<T> = std::result::Result<T, ModelError>;
