//! Short-time Fourier transform power spectrograms and their exports.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::Waveform;

pub const DEFAULT_WINDOW_SIZE: usize = 1024;
pub const DEFAULT_HOP: usize = 512;

#[derive(Debug, Error)]
pub enum SpectrogramError {
    #[error("signal of {len} samples is shorter than the {window_size}-sample window")]
    SignalTooShort { len: usize, window_size: usize },
    #[error("window size {0} is not a power of two")]
    WindowNotPowerOfTwo(usize),
    #[error("hop must be at least one sample")]
    ZeroHop,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Hann,
    Rectangular,
}

impl WindowKind {
    /// Periodic window coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            WindowKind::Rectangular => vec![1.0; n],
            WindowKind::Hann => (0..n)
                .map(|i| {
                    let phase = std::f64::consts::TAU * i as f64 / n as f64;
                    0.5 - 0.5 * phase.cos()
                })
                .collect(),
        }
    }
}

/// Frame-by-bin matrix of `|FFT(window * frame)[k]|^2` (unnormalized forward FFT).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrogram {
    power: Vec<f64>,
    num_frames: usize,
    num_bins: usize,
    pub window_size: usize,
    pub hop: usize,
    pub sample_rate_hz: u32,
    pub window_kind: WindowKind,
}

impl PowerSpectrogram {
    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.power[t * self.num_bins..(t + 1) * self.num_bins]
    }

    pub fn get(&self, t: usize, k: usize) -> f64 {
        self.power[t * self.num_bins + k]
    }

    pub fn bin_frequency_hz(&self, k: usize) -> f64 {
        k as f64 * self.sample_rate_hz as f64 / self.window_size as f64
    }

    /// Total energy of frame `t` across the full (two-sided) spectrum.
    ///
    /// Interior bins stand for a conjugate pair and count twice, so for a
    /// rectangular window this equals `window_size * sum(frame^2)`.
    pub fn frame_energy(&self, t: usize) -> f64 {
        let row = self.frame(t);
        let last = self.num_bins - 1;
        row.iter()
            .enumerate()
            .map(|(k, &p)| if k == 0 || k == last { p } else { 2.0 * p })
            .sum()
    }

    /// Index of the strongest bin in frame `t`.
    pub fn peak_bin(&self, t: usize) -> usize {
        let row = self.frame(t);
        let mut best = 0;
        for (k, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = k;
            }
        }
        best
    }

    /// Rows are frames, columns are bins.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for t in 0..self.num_frames {
            for (k, p) in self.frame(t).iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write!(out, "{p:e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), SpectrogramError> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Binary PGM (P5): width = frames, height = bins with low frequencies at
    /// the bottom; log-power min-max scaled to 0..=255 per image.
    pub fn to_pgm(&self) -> Vec<u8> {
        let floor = 1e-12;
        let logs: Vec<f64> = self.power.iter().map(|p| (p + floor).log10()).collect();
        let (lo, hi) = logs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = hi - lo;
        let mut out = format!("P5\n{} {}\n255\n", self.num_frames, self.num_bins).into_bytes();
        for k in (0..self.num_bins).rev() {
            for t in 0..self.num_frames {
                let v = logs[t * self.num_bins + k];
                let level = if span > 0.0 {
                    ((v - lo) / span * 255.0).round()
                } else {
                    0.0
                };
                out.push(level as u8);
            }
        }
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<(), SpectrogramError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_pgm())?;
        Ok(())
    }
}

/// Number of full frames for a signal of `len` samples.
pub fn frame_count(len: usize, window_size: usize, hop: usize) -> usize {
    if len < window_size {
        0
    } else {
        (len - window_size) / hop + 1
    }
}

pub fn stft_power(
    w: &Waveform,
    window_size: usize,
    hop: usize,
    window_kind: WindowKind,
) -> Result<PowerSpectrogram, SpectrogramError> {
    if !window_size.is_power_of_two() {
        return Err(SpectrogramError::WindowNotPowerOfTwo(window_size));
    }
    if hop == 0 {
        return Err(SpectrogramError::ZeroHop);
    }
    let samples = w.samples();
    if samples.len() < window_size {
        return Err(SpectrogramError::SignalTooShort {
            len: samples.len(),
            window_size,
        });
    }
    let num_frames = frame_count(samples.len(), window_size, hop);
    let num_bins = window_size / 2 + 1;
    let window = window_kind.coefficients(window_size);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(window_size);

    let mut power = Vec::with_capacity(num_frames * num_bins);
    let mut buf = vec![Complex::new(0.0, 0.0); window_size];
    for t in 0..num_frames {
        let frame = &samples[t * hop..t * hop + window_size];
        for ((b, &x), &c) in buf.iter_mut().zip(frame).zip(&window) {
            *b = Complex::new(x * c, 0.0);
        }
        fft.process(&mut buf);
        power.extend(buf[..num_bins].iter().map(|z| z.norm_sqr()));
    }
    Ok(PowerSpectrogram {
        power,
        num_frames,
        num_bins,
        window_size,
        hop,
        sample_rate_hz: w.sample_rate_hz(),
        window_kind,
    })
}
