//! Denoising autoencoder toolkit for induction-motor sound recordings.
//!
//! The pipeline corrupts clean recordings with Gaussian or blue noise,
//! trains a strided 1D convolutional autoencoder on (noisy, clean) pairs
//! with hand-written backpropagation, Adam and a max-norm constraint, and
//! scores the result with per-sound MSE and STFT spectrograms.
//!
//! Modules, roughly in pipeline order:
//!
//! - [`signal`], [`spectrogram`], [`wav`]: waveforms, min-max scaling, STFT, file IO
//! - [`dataset`]: MAFAULDA CSV ingestion, splits, synthetic motor sounds, download
//! - [`noise`]: noise generators and additive corruption
//! - [`nn`]: convolution layers, the autoencoder, checkpoints
//! - [`training`]: losses, Adam, the training loop
//! - [`evaluation`]: per-sound MSE, reports, comparison bundles

pub mod dataset;
pub mod evaluation;
pub mod nn;
pub mod noise;
pub mod rng;
pub mod signal;
pub mod spectrogram;
pub mod training;
pub mod wav;

pub use signal::{denormalize, minmax_normalize, NormParams, NormalizedWaveform, Waveform};
