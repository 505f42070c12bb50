//! Hand-differentiated 1D convolutional autoencoder.

mod activation;
mod checkpoint;
mod conv;
mod inference;
mod maxnorm;
mod model;
mod tensor;

use thiserror::Error;

pub use activation::{sigmoid, Activation};
pub use checkpoint::{load_checkpoint, save_checkpoint, sidecar_path, Checkpoint, CHECKPOINT_VERSION};
pub use conv::{Conv1DLayer, Conv1DTransposeLayer, LayerGrads, Padding};
pub use inference::denoise_samples;
pub use maxnorm::{apply_max_norm, unit_norms, UnitLayout, DEFAULT_MAX_NORM};
pub use model::{init_model, ArchSpec, AutoencoderModel, ForwardCache, Gradients, Layer};
pub use tensor::Tensor3;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("expected {expected} input channels, got {got}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("input length {length} is not divisible by the model's downsampling factor {factor}")]
    LengthNotDivisible { length: usize, factor: usize },
    #[error("forward cache was produced by a different parameter state")]
    StaleCache,
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
