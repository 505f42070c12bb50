use std::path::{Path, PathBuf};

use motor_dae::noise::NoiseSpec;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const MANIFEST_VERSION: u32 = 1;

/// Output of `prepare`: one WAV per converted CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedManifest {
    pub version: u32,
    pub mic_column: usize,
    pub files: Vec<PreparedFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedFile {
    /// Path of the source CSV relative to the dataset root, without extension.
    pub id: String,
    pub category: String,
    /// Relative to the manifest's directory.
    pub wav: PathBuf,
    pub source: PathBuf,
}

/// Output of `corrupt`: clean/noisy WAV pairs and the recipe that made them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairsManifest {
    pub version: u32,
    pub noise: NoiseSpec,
    pub split_seed: u64,
    pub pairs: Vec<SoundPairEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundPairEntry {
    pub id: String,
    pub category: String,
    /// Both paths are relative to the manifest's directory unless absolute.
    pub clean: PathBuf,
    pub noisy: PathBuf,
    pub noise_seed: u64,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
    }
    let text = serde_json::to_string_pretty(value).expect("manifest serializes") + "\n";
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Resolves a manifest-relative path.
pub fn resolve(manifest: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest.parent().unwrap_or(Path::new("")).join(p)
    }
}

/// Identifier of `file` under `root`: the relative path without extension,
/// `/`-separated on every platform.
pub fn relative_id(root: &Path, file: &Path) -> Option<String> {
    let rel = file.strip_prefix(root).ok()?.with_extension("");
    let parts: Vec<String> = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect();
    Some(parts.join("/"))
}
