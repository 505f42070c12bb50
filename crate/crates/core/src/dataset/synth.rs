use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::rng::CounterRng;
use crate::signal::{Waveform, DEFAULT_SAMPLE_RATE_HZ};

/// A harmonic series standing in for a motor recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticMotorConfig {
    pub rotation_hz: f64,
    pub num_harmonics: usize,
    pub harmonic_decay: f64,
    pub duration_s: f64,
    pub sample_rate_hz: u32,
    pub amplitude: f64,
    pub seed: u64,
}

impl Default for SyntheticMotorConfig {
    fn default() -> Self {
        Self {
            rotation_hz: 60.0,
            num_harmonics: 6,
            harmonic_decay: 0.6,
            duration_s: 5.0,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            amplitude: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticMotorConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |msg: &str| Err(DatasetError::InvalidConfig(msg.to_string()));
        if !(self.rotation_hz > 0.0 && self.rotation_hz.is_finite()) {
            return bad("rotation_hz must be positive");
        }
        if self.num_harmonics == 0 {
            return bad("num_harmonics must be at least 1");
        }
        if !(self.harmonic_decay > 0.0 && self.harmonic_decay <= 1.0) {
            return bad("harmonic_decay must lie in (0, 1]");
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad("duration_s must be positive");
        }
        if self.sample_rate_hz == 0 {
            return bad("sample_rate_hz must be positive");
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return bad("amplitude must be positive");
        }
        let nyquist_hz = self.sample_rate_hz as f64 / 2.0;
        if self.rotation_hz * self.num_harmonics as f64 >= nyquist_hz {
            return Err(DatasetError::AliasedHarmonic {
                rotation_hz: self.rotation_hz,
                harmonics: self.num_harmonics,
                nyquist_hz,
            });
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        (self.duration_s * self.sample_rate_hz as f64).round().max(1.0) as usize
    }
}

/// Sum of decaying harmonics of the rotation frequency with seeded phases.
pub fn synth_motor_sound(cfg: &SyntheticMotorConfig) -> Result<Waveform, DatasetError> {
    cfg.validate()?;
    let mut rng = CounterRng::new(cfg.seed);
    let partials: Vec<(f64, f64, f64)> = (1..=cfg.num_harmonics)
        .map(|h| {
            let amp = cfg.amplitude * cfg.harmonic_decay.powi(h as i32 - 1);
            let omega = TAU * h as f64 * cfg.rotation_hz / cfg.sample_rate_hz as f64;
            (amp, omega, TAU * rng.next_f64())
        })
        .collect();
    let samples = (0..cfg.num_samples())
        .map(|i| {
            let n = i as f64;
            partials
                .iter()
                .map(|&(amp, omega, phase)| amp * (omega * n + phase).sin())
                .sum()
        })
        .collect();
    Ok(Waveform::new(samples, cfg.sample_rate_hz)?)
}
