//! MAFAULDA ingestion, corpus splitting, synthetic motor sounds and dataset
//! acquisition.

mod csv;
mod fetch;
mod split;
mod synth;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::csv::{csv_to_wav, extract_microphone, parse_csv, write_csv, DEFAULT_MIC_COLUMN};
pub use self::fetch::{fetch_dataset, sha256_hex};
pub use self::split::{split_counts, split_dataset, DatasetSplit};
pub use self::synth::{synth_motor_sound, SyntheticMotorConfig};

use crate::signal::SignalError;
use crate::wav::WavError;

/// Channels per MAFAULDA recording (two 4-channel acquisition modules).
pub const MAFAULDA_CHANNELS: usize = 8;
/// Samples per genuine MAFAULDA recording (5 s at 50 kHz).
pub const MAFAULDA_SAMPLES: usize = 250_000;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: line {line}: {reason}")]
    MalformedRow { path: String, line: usize, reason: String },
    #[error("{0}: file contains no rows")]
    EmptyFile(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("column {index} out of range for {num_channels} channels")]
    ColumnOutOfRange { index: usize, num_channels: usize },
    #[error("cannot split an empty corpus")]
    EmptyCorpus,
    #[error("duplicate corpus identifier {0:?}")]
    DuplicateId(String),
    #[error("harmonic {harmonics} x {rotation_hz} Hz reaches the Nyquist limit of {nyquist_hz} Hz")]
    AliasedHarmonic {
        rotation_hz: f64,
        harmonics: usize,
        nyquist_hz: f64,
    },
    #[error("invalid synthesis configuration: {0}")]
    InvalidConfig(String),
    #[error("network failure fetching {url}: {reason}")]
    NetworkFailure { url: String, reason: String },
    #[error("checksum mismatch: expected {expected}, got {actual}")]
    ChecksumMismatch { expected: String, actual: String },
    #[error("extraction failed: {0}")]
    ExtractionFailure(String),
    #[error(transparent)]
    Wav(#[from] WavError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

impl DatasetError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Operating condition of a recording, inferred from the archive layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Normal,
    #[serde(rename = "horizontal_misalignment_0_5mm")]
    HorizontalMisalignment0_5mm,
    #[serde(rename = "horizontal_misalignment_1_0mm")]
    HorizontalMisalignment1_0mm,
    #[serde(rename = "horizontal_misalignment_1_5mm")]
    HorizontalMisalignment1_5mm,
    #[serde(rename = "horizontal_misalignment_2_0mm")]
    HorizontalMisalignment2_0mm,
    Other,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Normal,
        Category::HorizontalMisalignment0_5mm,
        Category::HorizontalMisalignment1_0mm,
        Category::HorizontalMisalignment1_5mm,
        Category::HorizontalMisalignment2_0mm,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Normal => "normal",
            Category::HorizontalMisalignment0_5mm => "horizontal_misalignment_0_5mm",
            Category::HorizontalMisalignment1_0mm => "horizontal_misalignment_1_0mm",
            Category::HorizontalMisalignment1_5mm => "horizontal_misalignment_1_5mm",
            Category::HorizontalMisalignment2_0mm => "horizontal_misalignment_2_0mm",
            Category::Other => "other",
        }
    }

    /// True for every horizontal-misalignment severity.
    pub fn is_horizontal_misalignment(self) -> bool {
        matches!(
            self,
            Category::HorizontalMisalignment0_5mm
                | Category::HorizontalMisalignment1_0mm
                | Category::HorizontalMisalignment1_5mm
                | Category::HorizontalMisalignment2_0mm
        )
    }

    /// Infers the category from path components such as
    /// `normal/12.288.csv` or `horizontal-misalignment/1.5mm/25.6.csv`.
    pub fn from_path(path: &Path) -> Category {
        let parts: Vec<String> = path
            .components()
            .map(|c| c.as_os_str().to_string_lossy().to_ascii_lowercase())
            .collect();
        let dir_parts = &parts[..parts.len().saturating_sub(1)];
        for (i, part) in dir_parts.iter().enumerate() {
            if part == "normal" {
                return Category::Normal;
            }
            if part == "horizontal-misalignment" || part == "horizontal_misalignment" {
                let severity = dir_parts.get(i + 1).map(String::as_str);
                return match severity {
                    Some("0.5mm") => Category::HorizontalMisalignment0_5mm,
                    Some("1.0mm") => Category::HorizontalMisalignment1_0mm,
                    Some("1.5mm") => Category::HorizontalMisalignment1_5mm,
                    Some("2.0mm") => Category::HorizontalMisalignment2_0mm,
                    _ => Category::Other,
                };
            }
        }
        Category::Other
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

/// One multichannel recording, stored row-major (`num_samples x num_channels`).
#[derive(Debug, Clone, PartialEq)]
pub struct MafauldaRecord {
    pub channels: Vec<f64>,
    pub num_samples: usize,
    pub num_channels: usize,
    pub sample_rate_hz: u32,
    pub category: Category,
    pub source_path: String,
    /// False when the row count differs from a genuine 5 s recording.
    pub nominal_length: bool,
}

impl MafauldaRecord {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.channels[i * self.num_channels..(i + 1) * self.num_channels]
    }
}
