//! WAV input and output.
//!
//! Reads 16-bit PCM and 32-bit float files (multi-channel input is mixed down
//! to mono by averaging). Writes 32-bit float mono.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use thiserror::Error;

use crate::signal::{SignalError, Waveform};

#[derive(Debug, Error)]
pub enum WavError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: hound::Error,
    },
    #[error("{path}: unsupported sample encoding ({bits}-bit {format:?})")]
    UnsupportedFormat {
        path: String,
        bits: u16,
        format: SampleFormat,
    },
    #[error("{path}: {source}")]
    Signal {
        path: String,
        #[source]
        source: SignalError,
    },
}

fn io_err(path: &Path) -> impl FnOnce(hound::Error) -> WavError + '_ {
    move |source| WavError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Reads a WAV file as a mono waveform at the file's declared rate.
pub fn read_wav(path: &Path) -> Result<Waveform, WavError> {
    let mut reader = WavReader::open(path).map_err(io_err(path))?;
    let spec = reader.spec();
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(io_err(path))?,
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(io_err(path))?,
        (format, bits) => {
            return Err(WavError::UnsupportedFormat {
                path: path.display().to_string(),
                bits,
                format,
            })
        }
    };
    let channels = spec.channels.max(1) as usize;
    let mono = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f64>() / channels as f64)
            .collect()
    };
    Waveform::new(mono, spec.sample_rate).map_err(|source| WavError::Signal {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `w` as 32-bit float mono at its own sample rate.
pub fn write_wav(path: &Path, w: &Waveform) -> Result<(), WavError> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: w.sample_rate_hz(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec).map_err(io_err(path))?;
    for &s in w.samples() {
        writer.write_sample(s as f32).map_err(io_err(path))?;
    }
    writer.finalize().map_err(io_err(path))
}
