//! Dense tensor kernels for the U2F network.
//!
//! Every differentiable operation comes as a `*_forward` / `*_backward`
//! pair of pure functions; the caller keeps whatever the backward pass
//! needs (usually the forward input plus a small context struct). All
//! math is in `f64` and fully deterministic.

mod activation;
mod conv;
mod error;
pub mod gradcheck;
mod linear;
mod norm;
mod pool;
mod shuffle;
mod tensor;

pub use activation::{relu, relu_backward};
pub use conv::{conv3d_backward, conv3d_forward, Conv3dGrads, ConvSpec};
pub use error::NnError;
pub use linear::{linear_backward, linear_forward, LinearGrads};
pub use norm::{batch_norm3d_backward, batch_norm3d_forward, BnContext, Mode};
pub use pool::{max_pool3d, max_pool3d_backward, PoolContext};
pub use shuffle::{channel_concat, channel_shuffle, channel_shuffle_backward, channel_split};
pub use tensor::Tensor;

pub type Result<T> = std::result::Result<T, NnError>;
