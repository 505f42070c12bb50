//! Per-sound reconstruction error, noisy baselines and report output.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{denoise_samples, AutoencoderModel, NnError};
use crate::signal::{NormalizedWaveform, Waveform};
use crate::spectrogram::{stft_power, SpectrogramError, WindowKind, DEFAULT_HOP, DEFAULT_WINDOW_SIZE};
use crate::wav::{write_wav, WavError};

pub const REPORT_VERSION: u32 = 1;
const RATIO_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("signals differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Wav(#[from] WavError),
    #[error(transparent)]
    Spectrogram(#[from] SpectrogramError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

fn mse(a: &[f64], b: &[f64]) -> Result<f64, EvalError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(EvalError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64)
}

/// Mean squared error between a normalized clean sound and a denoised one.
pub fn per_sound_mse(clean: &NormalizedWaveform, denoised: &[f64]) -> Result<f64, EvalError> {
    mse(clean.samples(), denoised)
}

/// The error of the (normalized) noisy input itself.
pub fn baseline_mse(clean: &NormalizedWaveform, noisy: &NormalizedWaveform) -> Result<f64, EvalError> {
    mse(clean.samples(), noisy.samples())
}

/// One test sound with both signals normalized independently.
#[derive(Debug, Clone)]
pub struct SoundPair {
    pub id: String,
    pub clean: NormalizedWaveform,
    pub noisy: NormalizedWaveform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub sound_id: String,
    pub mse_denoised: f64,
    pub mse_noisy_baseline: f64,
    pub improvement_ratio: f64,
}

impl ReportEntry {
    pub fn new(sound_id: String, mse_denoised: f64, mse_noisy_baseline: f64) -> Self {
        Self {
            sound_id,
            mse_denoised,
            mse_noisy_baseline,
            improvement_ratio: mse_noisy_baseline / mse_denoised.max(RATIO_FLOOR),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        let mean = (sorted.iter().sum::<f64>() / n as f64).clamp(sorted[0], sorted[n - 1]);
        Some(Self {
            min: sorted[0],
            max: sorted[n - 1],
            mean,
            median,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub category: String,
    pub noise_kind: String,
    pub entries: Vec<ReportEntry>,
    /// Statistics of `mse_denoised`.
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportMeta {
    pub category: String,
    pub noise_kind: String,
}

impl EvalReport {
    pub fn new(entries: Vec<ReportEntry>, meta: &ReportMeta) -> Result<Self, EvalError> {
        let mses: Vec<f64> = entries.iter().map(|e| e.mse_denoised).collect();
        let summary = Summary::of(&mses).ok_or(EvalError::EmptyTestSet)?;
        Ok(Self {
            version: REPORT_VERSION,
            category: meta.category.clone(),
            noise_kind: meta.noise_kind.clone(),
            entries,
            summary,
        })
    }

    pub fn median_improvement(&self) -> f64 {
        let ratios: Vec<f64> = self.entries.iter().map(|e| e.improvement_ratio).collect();
        Summary::of(&ratios).map_or(f64::NAN, |s| s.median)
    }

    /// `category noise_kind n min max mean median`
    pub fn summary_line(&self) -> String {
        let s = &self.summary;
        format!(
            "{} {} {} {} {} {} {}",
            self.category,
            self.noise_kind,
            self.entries.len(),
            s.min,
            s.max,
            s.mean,
            s.median
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sound_id,mse_denoised,mse_noisy_baseline,improvement_ratio\n");
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{}",
                e.sound_id, e.mse_denoised, e.mse_noisy_baseline, e.improvement_ratio
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Denoises every test sound with windowed inference and scores it.
pub fn evaluate_testset(
    model: &AutoencoderModel,
    test: &[SoundPair],
    meta: &ReportMeta,
    window_len: usize,
) -> Result<EvalReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let entries = test
        .par_iter()
        .map(|pair| {
            let denoised = denoise_samples(model, pair.noisy.samples(), window_len)?;
            let mse_denoised = per_sound_mse(&pair.clean, &denoised)?;
            let baseline = baseline_mse(&pair.clean, &pair.noisy)?;
            Ok(ReportEntry::new(pair.id.clone(), mse_denoised, baseline))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    EvalReport::new(entries, meta)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), EvalError> {
    std::fs::write(path, bytes).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn create_dir(dir: &Path) -> Result<(), EvalError> {
    std::fs::create_dir_all(dir).map_err(|source| EvalError::Io {
        path: dir.display().to_string(),
        source,
    })
}

/// Writes `report.json` and `report.csv` into `dir`.
pub fn emit_report(report: &EvalReport, dir: &Path) -> Result<(), EvalError> {
    create_dir(dir)?;
    write_file(&dir.join("report.json"), report.to_json().as_bytes())?;
    write_file(&dir.join("report.csv"), report.to_csv().as_bytes())
}

/// STFT settings for [`emit_comparison_bundle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BundleOptions {
    pub window_size: usize,
    pub hop: usize,
    pub window_kind: WindowKind,
}

impl Default for BundleOptions {
    fn default() -> Self {
        Self {
            window_size: DEFAULT_WINDOW_SIZE,
            hop: DEFAULT_HOP,
            window_kind: WindowKind::Hann,
        }
    }
}

/// File names written by [`emit_comparison_bundle`].
pub fn bundle_file_names() -> Vec<String> {
    ["clean", "noisy", "denoised"]
        .iter()
        .flat_map(|s| {
            [
                format!("{s}.wav"),
                format!("{s}_spectrogram.csv"),
                format!("{s}_spectrogram.pgm"),
            ]
        })
        .collect()
}

/// Writes the clean/noisy/denoised triptych: a WAV, a spectrogram CSV and a
/// spectrogram PGM for each signal.
pub fn emit_comparison_bundle(
    clean: &Waveform,
    noisy: &Waveform,
    denoised: &Waveform,
    out_dir: &Path,
    opts: BundleOptions,
) -> Result<(), EvalError> {
    for other in [noisy, denoised] {
        if other.len() != clean.len() {
            return Err(EvalError::LengthMismatch {
                left: clean.len(),
                right: other.len(),
            });
        }
    }
    create_dir(out_dir)?;
    for (name, w) in [("clean", clean), ("noisy", noisy), ("denoised", denoised)] {
        write_wav(&out_dir.join(format!("{name}.wav")), w)?;
        let spec = stft_power(w, opts.window_size, opts.hop, opts.window_kind)?;
        spec.write_csv(&out_dir.join(format!("{name}_spectrogram.csv")))?;
        spec.write_pgm(&out_dir.join(format!("{name}_spectrogram.pgm")))?;
    }
    Ok(())
}
