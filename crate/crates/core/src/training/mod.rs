//! Losses, the Adam optimizer and the minibatch training loop.

mod adam;
mod fit;
mod loss;

use thiserror::Error;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use fit::{
    evaluate_bce, fit, fit_with_observer, make_windows, EpochRecord, LossCurve, LossKind, StepInfo, TrainConfig,
    TrainPair,
};
pub use loss::{bce_grad, bce_loss, mse_grad, mse_loss, BCE_CLAMP_EPS};

use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("target has {target} elements but prediction has {prediction}")]
    ShapeMismatch { target: usize, prediction: usize },
    #[error("gradient and parameter lists do not line up")]
    ParameterShape,
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("loss became non-finite at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Nn(#[from] NnError),
}
