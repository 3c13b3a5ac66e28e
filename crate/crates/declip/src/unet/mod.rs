//! A small from-scratch convolutional U-Net and its training loop.
//!
//! The network maps log magnitude spectrum images of clipped speech to
//! the corresponding clean images. Everything here is plain `f64` on the
//! CPU: tensors, conv layers with hand-derived backward passes, Adam,
//! and a binary checkpoint format. The scale is modest (a few hundred
//! thousand parameters at desk size) and the gradients are verified
//! against finite differences in the test suites.

pub mod checkpoint;
pub mod layers;
pub mod model;
pub mod tensor;
pub mod train;

pub use checkpoint::{load_model, save_model};
pub use layers::{AdamConfig, Conv2d};
pub use model::{UNetConfig, UNetModel};
pub use tensor::Tensor4;
pub use train::{enhance, mse_loss, train, TrainConfig, TrainReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum UnetError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad network configuration: {0}")]
    BadConfig(String),
    #[error("tensor shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint was trained with a different configuration: {0}")]
    ConfigMismatch(String),
}
