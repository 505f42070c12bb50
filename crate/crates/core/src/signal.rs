//! Sampled signals and min-max normalization.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Nominal MAFAULDA acquisition rate.
pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 50_000;

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("signal has no samples")]
    Empty,
    #[error("sample {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("signal is constant ({value}); min-max normalization is undefined")]
    ConstantSignal { value: f64 },
    #[error("normalized sample {index} = {value} lies outside [0, 1]")]
    OutOfUnitRange { index: usize, value: f64 },
    #[error("invalid normalization range: min {min} must be below max {max}")]
    InvalidNormRange { min: f64, max: f64 },
}

fn check_finite(samples: &[f64]) -> Result<(), SignalError> {
    if samples.is_empty() {
        return Err(SignalError::Empty);
    }
    match samples.iter().position(|s| !s.is_finite()) {
        Some(index) => Err(SignalError::NonFinite {
            index,
            value: samples[index],
        }),
        None => Ok(()),
    }
}

/// A finite, nonempty real-valued signal with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self, SignalError> {
        if sample_rate_hz == 0 {
            return Err(SignalError::ZeroSampleRate);
        }
        check_finite(&samples)?;
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
                (lo.min(s), hi.max(s))
            })
    }
}

/// The source extremes needed to invert a min-max normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub min_val: f64,
    pub max_val: f64,
}

impl NormParams {
    pub fn new(min_val: f64, max_val: f64) -> Result<Self, SignalError> {
        if !(min_val.is_finite() && max_val.is_finite() && max_val > min_val) {
            return Err(SignalError::InvalidNormRange {
                min: min_val,
                max: max_val,
            });
        }
        Ok(Self { min_val, max_val })
    }

    pub fn span(&self) -> f64 {
        self.max_val - self.min_val
    }

    pub fn normalize_value(&self, x: f64) -> f64 {
        (x - self.min_val) / self.span()
    }

    pub fn denormalize_value(&self, n: f64) -> f64 {
        n * self.span() + self.min_val
    }

    /// Maps unit-range values (e.g. a model's output) back to source units.
    pub fn denormalize(&self, samples: &[f64]) -> Vec<f64> {
        samples.iter().map(|&n| self.denormalize_value(n)).collect()
    }
}

/// A signal scaled into `[0, 1]` together with its [`NormParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedWaveform {
    samples: Vec<f64>,
    sample_rate_hz: u32,
    norm: NormParams,
}

impl NormalizedWaveform {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32, norm: NormParams) -> Result<Self, SignalError> {
        if sample_rate_hz == 0 {
            return Err(SignalError::ZeroSampleRate);
        }
        check_finite(&samples)?;
        if let Some(index) = samples.iter().position(|s| !(0.0..=1.0).contains(s)) {
            return Err(SignalError::OutOfUnitRange {
                index,
                value: samples[index],
            });
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            norm,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn norm(&self) -> NormParams {
        self.norm
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Scales a signal so its minimum maps to 0 and its maximum to 1.
pub fn minmax_normalize(w: &Waveform) -> Result<NormalizedWaveform, SignalError> {
    let (min_val, max_val) = w.min_max();
    if max_val <= min_val {
        return Err(SignalError::ConstantSignal { value: min_val });
    }
    let norm = NormParams { min_val, max_val };
    let samples = w.samples.iter().map(|&x| norm.normalize_value(x)).collect();
    Ok(NormalizedWaveform {
        samples,
        sample_rate_hz: w.sample_rate_hz,
        norm,
    })
}

pub fn denormalize(n: &NormalizedWaveform) -> Waveform {
    Waveform {
        samples: n.norm.denormalize(&n.samples),
        sample_rate_hz: n.sample_rate_hz,
    }
}
