//! Noise generators and additive corruption.

use std::path::{Path, PathBuf};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::CounterRng;
use crate::signal::{SignalError, Waveform};
use crate::wav::{read_wav, WavError};

pub const DEFAULT_NOISE_FACTOR: f64 = 0.1;
/// Shortest signal [`blue_noise`] will shape.
pub const MIN_BLUE_NOISE_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("clean signal has {clean} samples but noise has {noise}")]
    LengthMismatch { clean: usize, noise: usize },
    #[error("clean signal is sampled at {clean} Hz but noise at {noise} Hz")]
    RateMismatch { clean: u32, noise: u32 },
    #[error("noise file rate {file_hz} Hz is not an integer multiple of {target_hz} Hz")]
    UnsupportedRate { file_hz: u32, target_hz: u32 },
    #[error("noise length must be at least {min} samples, got {got}")]
    TooShort { min: usize, got: usize },
    #[error("invalid noise recipe: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] WavError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    Blue,
    File,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Blue => "blue",
            NoiseKind::File => "file",
        }
    }
}

/// A serializable noise recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    #[serde(rename = "factor")]
    pub noise_factor: f64,
    pub seed: u64,
    #[serde(default, rename = "path", skip_serializing_if = "Option::is_none")]
    pub file_path: Option<PathBuf>,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            kind: NoiseKind::Gaussian,
            noise_factor: DEFAULT_NOISE_FACTOR,
            seed: 0,
            file_path: None,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.noise_factor.is_finite() && self.noise_factor >= 0.0) {
            return Err(NoiseError::InvalidSpec(format!(
                "noise factor must be finite and nonnegative, got {}",
                self.noise_factor
            )));
        }
        match (self.kind, &self.file_path) {
            (NoiseKind::File, None) => Err(NoiseError::InvalidSpec("kind \"file\" requires a path".into())),
            (NoiseKind::Gaussian | NoiseKind::Blue, Some(_)) => {
                Err(NoiseError::InvalidSpec("a path is only valid for kind \"file\"".into()))
            }
            _ => Ok(()),
        }
    }

    /// Unit-scale noise matching a target length and rate. `seed` overrides
    /// the recipe's own seed so each sound can get a distinct realization.
    pub fn generate(&self, length: usize, sample_rate_hz: u32, seed: u64) -> Result<Waveform, NoiseError> {
        self.validate()?;
        match self.kind {
            NoiseKind::Gaussian => gaussian_noise(length, sample_rate_hz, seed),
            NoiseKind::Blue => blue_noise(length, sample_rate_hz, seed),
            NoiseKind::File => load_noise(self.file_path.as_deref().unwrap(), length, sample_rate_hz),
        }
    }
}

/// I.i.d. standard normal samples.
pub fn gaussian_noise(length: usize, sample_rate_hz: u32, seed: u64) -> Result<Waveform, NoiseError> {
    if length == 0 {
        return Err(NoiseError::TooShort { min: 1, got: 0 });
    }
    let mut samples = vec![0.0; length];
    CounterRng::new(seed).fill_standard_normal(&mut samples);
    Ok(Waveform::new(samples, sample_rate_hz)?)
}

/// Noise whose power spectral density grows linearly with frequency.
///
/// White Gaussian noise is shaped by an amplitude gain of `sqrt(f)` with the
/// DC bin removed, then rescaled to zero mean and unit variance.
pub fn blue_noise(length: usize, sample_rate_hz: u32, seed: u64) -> Result<Waveform, NoiseError> {
    if length < MIN_BLUE_NOISE_LEN {
        return Err(NoiseError::TooShort {
            min: MIN_BLUE_NOISE_LEN,
            got: length,
        });
    }
    let mut white = vec![0.0; length];
    CounterRng::new(seed).fill_standard_normal(&mut white);

    let mut planner = FftPlanner::<f64>::new();
    let mut spectrum: Vec<Complex<f64>> = white.iter().map(|&x| Complex::new(x, 0.0)).collect();
    planner.plan_fft_forward(length).process(&mut spectrum);
    for (k, z) in spectrum.iter_mut().enumerate() {
        // Bins k and length-k are the same physical frequency.
        let freq_index = k.min(length - k);
        *z *= (freq_index as f64).sqrt();
    }
    planner.plan_fft_inverse(length).process(&mut spectrum);

    let mut samples: Vec<f64> = spectrum.iter().map(|z| z.re).collect();
    let n = length as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    let scale = 1.0 / var.sqrt();
    for s in &mut samples {
        *s = (*s - mean) * scale;
    }
    Ok(Waveform::new(samples, sample_rate_hz)?)
}

/// Loads a recorded noise file, decimating by an integer factor if needed
/// and trimming or cyclically looping it to `target_length`.
pub fn load_noise(path: &Path, target_length: usize, target_rate_hz: u32) -> Result<Waveform, NoiseError> {
    if target_length == 0 {
        return Err(NoiseError::TooShort { min: 1, got: 0 });
    }
    let w = read_wav(path)?;
    let file_hz = w.sample_rate_hz();
    let samples = if file_hz == target_rate_hz {
        w.into_samples()
    } else if file_hz > target_rate_hz && file_hz % target_rate_hz == 0 {
        let factor = (file_hz / target_rate_hz) as usize;
        let decimated: Vec<f64> = w
            .samples()
            .chunks_exact(factor)
            .map(|c| c.iter().sum::<f64>() / factor as f64)
            .collect();
        if decimated.is_empty() {
            return Err(NoiseError::TooShort {
                min: factor,
                got: w.len(),
            });
        }
        decimated
    } else {
        return Err(NoiseError::UnsupportedRate {
            file_hz,
            target_hz: target_rate_hz,
        });
    };
    let looped = samples.iter().copied().cycle().take(target_length).collect();
    Ok(Waveform::new(looped, target_rate_hz)?)
}

/// `clean + noise_factor * noise`, sample by sample.
pub fn corrupt(clean: &Waveform, noise: &Waveform, noise_factor: f64) -> Result<Waveform, NoiseError> {
    if clean.len() != noise.len() {
        return Err(NoiseError::LengthMismatch {
            clean: clean.len(),
            noise: noise.len(),
        });
    }
    if clean.sample_rate_hz() != noise.sample_rate_hz() {
        return Err(NoiseError::RateMismatch {
            clean: clean.sample_rate_hz(),
            noise: noise.sample_rate_hz(),
        });
    }
    let samples = clean
        .samples()
        .iter()
        .zip(noise.samples())
        .map(|(c, n)| c + noise_factor * n)
        .collect();
    Ok(Waveform::new(samples, clean.sample_rate_hz())?)
}
