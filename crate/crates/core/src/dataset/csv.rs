use std::fmt::Write as _;
use std::path::Path;

use log::warn;

use super::{Category, DatasetError, MafauldaRecord, MAFAULDA_CHANNELS, MAFAULDA_SAMPLES};
use crate::signal::{Waveform, DEFAULT_SAMPLE_RATE_HZ};
use crate::wav::write_wav;

/// The microphone is the last column of a MAFAULDA row.
pub const DEFAULT_MIC_COLUMN: usize = 7;

/// Parses a headerless 8-column MAFAULDA CSV file (LF or CRLF line endings).
pub fn parse_csv(path: &Path) -> Result<MafauldaRecord, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    let display = path.display().to_string();
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last().is_some_and(|l| l.trim_end_matches('\r').is_empty()) {
        lines.pop();
    }
    if lines.is_empty() {
        return Err(DatasetError::EmptyFile(display));
    }

    let mut channels = Vec::with_capacity(lines.len() * MAFAULDA_CHANNELS);
    for (i, line) in lines.iter().enumerate() {
        let line_no = i + 1;
        let malformed = |reason: String| DatasetError::MalformedRow {
            path: display.clone(),
            line: line_no,
            reason,
        };
        let fields: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
        if fields.len() != MAFAULDA_CHANNELS {
            return Err(malformed(format!(
                "expected {MAFAULDA_CHANNELS} fields, found {}",
                fields.len()
            )));
        }
        for field in fields {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| malformed(format!("non-numeric token {field:?}")))?;
            if !v.is_finite() {
                return Err(malformed(format!("non-finite value {field:?}")));
            }
            channels.push(v);
        }
    }

    let num_samples = lines.len();
    let nominal_length = num_samples == MAFAULDA_SAMPLES;
    if !nominal_length {
        warn!("{display}: {num_samples} rows (a full recording has {MAFAULDA_SAMPLES})");
    }
    Ok(MafauldaRecord {
        channels,
        num_samples,
        num_channels: MAFAULDA_CHANNELS,
        sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
        category: Category::from_path(path),
        source_path: display,
        nominal_length,
    })
}

/// Projects one channel of a record out as a waveform.
pub fn extract_microphone(rec: &MafauldaRecord, column_index: usize) -> Result<Waveform, DatasetError> {
    if column_index >= rec.num_channels {
        return Err(DatasetError::ColumnOutOfRange {
            index: column_index,
            num_channels: rec.num_channels,
        });
    }
    let column = rec
        .channels
        .chunks_exact(rec.num_channels)
        .map(|row| row[column_index])
        .collect();
    Ok(Waveform::new(column, rec.sample_rate_hz)?)
}

/// Converts one CSV recording to a float32 mono WAV and returns the
/// extracted waveform.
pub fn csv_to_wav(csv_path: &Path, wav_path: &Path, column_index: usize) -> Result<Waveform, DatasetError> {
    let rec = parse_csv(csv_path)?;
    let w = extract_microphone(&rec, column_index)?;
    write_wav(wav_path, &w)?;
    Ok(w)
}

/// Writes a row-major matrix in the MAFAULDA CSV layout.
pub fn write_csv(path: &Path, rows: &[[f64; MAFAULDA_CHANNELS]]) -> Result<(), DatasetError> {
    let mut out = String::with_capacity(rows.len() * 8 * 12);
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| DatasetError::io(parent, e))?;
    }
    std::fs::write(path, out).map_err(|e| DatasetError::io(path, e))
}
