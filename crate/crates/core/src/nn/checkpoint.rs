//! Checkpoints: a JSON manifest plus a sidecar blob of little-endian f32
//! values. Tensor `offset`/`len` in the manifest count f32 elements.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ArchSpec, AutoencoderModel, NnError};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
    len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ArchEntry {
    #[serde(flatten)]
    spec: ArchSpec,
    window_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    arch: ArchEntry,
    seed: u64,
    tensors: Vec<TensorEntry>,
}

/// A model together with the metadata stored beside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: AutoencoderModel,
    pub seed: u64,
    /// Window length used for training and windowed inference.
    pub window_len: usize,
}

/// `model.json` -> `model.bin`.
pub fn sidecar_path(manifest_path: &Path) -> PathBuf {
    manifest_path.with_extension("bin")
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> NnError + '_ {
    move |source| NnError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), NnError> {
    let mut tensors = Vec::new();
    let mut blob = Vec::new();
    let mut offset = 0;
    for (i, layer) in ckpt.model.layers().iter().enumerate() {
        let shape = layer.weight_shape().to_vec();
        let items = [
            (format!("layers.{i}.weight"), shape, layer.weights()),
            (format!("layers.{i}.bias"), vec![layer.bias().len()], layer.bias()),
        ];
        for (name, shape, values) in items {
            for &v in values {
                blob.extend_from_slice(&(v as f32).to_le_bytes());
            }
            tensors.push(TensorEntry {
                name,
                shape,
                offset,
                len: values.len(),
            });
            offset += values.len();
        }
    }
    let manifest = Manifest {
        version: CHECKPOINT_VERSION,
        arch: ArchEntry {
            spec: ckpt.model.arch().clone(),
            window_len: ckpt.window_len,
        },
        seed: ckpt.seed,
        tensors,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
    }
    std::fs::write(path, json + "\n").map_err(io(path))?;
    let bin = sidecar_path(path);
    std::fs::write(&bin, blob).map_err(io(&bin))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, NnError> {
    let bad = |m: String| NnError::Checkpoint(format!("{}: {m}", path.display()));
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if manifest.version != CHECKPOINT_VERSION {
        return Err(bad(format!("unsupported version {}", manifest.version)));
    }
    let bin = sidecar_path(path);
    let bytes = std::fs::read(&bin).map_err(io(&bin))?;
    if bytes.len() % 4 != 0 {
        return Err(bad("sidecar length is not a multiple of 4".into()));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();

    let mut model = AutoencoderModel::zeros(&manifest.arch.spec)?;
    let expected: Vec<(String, Vec<usize>)> = model
        .layers()
        .iter()
        .enumerate()
        .flat_map(|(i, l)| {
            [
                (format!("layers.{i}.weight"), l.weight_shape().to_vec()),
                (format!("layers.{i}.bias"), vec![l.bias().len()]),
            ]
        })
        .collect();
    if expected.len() != manifest.tensors.len() {
        return Err(bad(format!(
            "architecture needs {} tensors, manifest lists {}",
            expected.len(),
            manifest.tensors.len()
        )));
    }
    let mut params = model.parameters_mut();
    for ((name, shape), (entry, dst)) in expected.iter().zip(manifest.tensors.iter().zip(params.iter_mut())) {
        if &entry.name != name || &entry.shape != shape {
            return Err(bad(format!(
                "tensor {} {:?} does not match expected {name} {shape:?}",
                entry.name, entry.shape
            )));
        }
        if entry.len != dst.len() || entry.offset + entry.len > values.len() {
            return Err(bad(format!("tensor {name} has an invalid extent")));
        }
        dst.copy_from_slice(&values[entry.offset..entry.offset + entry.len]);
    }
    drop(params);
    if model.parameters().iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(bad("non-finite parameter".into()));
    }
    Ok(Checkpoint {
        model,
        seed: manifest.seed,
        window_len: manifest.arch.window_len,
    })
}
