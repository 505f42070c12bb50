use std::path::{Path, PathBuf};

use motor_dae::dataset::{Category, DEFAULT_MIC_COLUMN};
use motor_dae::nn::ArchSpec;
use motor_dae::noise::NoiseSpec;
use motor_dae::training::TrainConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Failure, EXIT_USAGE};

/// Window length used at desk scale.
pub const DESK_WINDOW_LEN: usize = 1024;
/// Window length used with `--full-scale`.
pub const FULL_SCALE_WINDOW_LEN: usize = 16_384;

/// Everything a pipeline run needs. Loaded from JSON and patched by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub dataset_dir: PathBuf,
    /// A category name such as `normal`, or `all`.
    pub category: String,
    pub mic_column: usize,
    pub noise: NoiseSpec,
    pub split_seed: u64,
    pub train: TrainConfig,
    pub arch: ArchSpec,
    pub prepared_dir: PathBuf,
    pub noisy_dir: PathBuf,
    pub model_path: PathBuf,
    pub report_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            dataset_dir: "data/mafaulda".into(),
            category: Category::Normal.as_str().into(),
            mic_column: DEFAULT_MIC_COLUMN,
            noise: NoiseSpec::default(),
            split_seed: 0,
            train: TrainConfig {
                window_len: DESK_WINDOW_LEN,
                ..TrainConfig::default()
            },
            arch: ArchSpec::desk(),
            prepared_dir: "work/prepared".into(),
            noisy_dir: "work/noisy".into(),
            model_path: "work/model/model.json".into(),
            report_dir: "work/report".into(),
        }
    }
}

impl PipelineConfig {
    /// `None` selects every category.
    pub fn category_filter(&self) -> Result<Option<Category>, Failure> {
        if self.category == "all" {
            return Ok(None);
        }
        self.category
            .parse::<Category>()
            .map(Some)
            .map_err(|e| Failure::new(EXIT_USAGE, format!("config: {e}")))
    }

    pub fn pairs_manifest(&self) -> PathBuf {
        self.noisy_dir.join("pairs.json")
    }

    pub fn prepared_manifest(&self) -> PathBuf {
        self.prepared_dir.join("manifest.json")
    }
}

/// Options that shape the config before subcommand-specific flags apply.
#[derive(Debug, Default)]
pub struct ConfigSources<'a> {
    pub file: Option<&'a Path>,
    pub full_scale: bool,
    pub seed: Option<u64>,
    pub overrides: &'a [(String, String)],
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn set_dotted(root: &mut Value, key: &str, raw: &str) -> Result<(), String> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let (leaf, parents) = parts.split_last().ok_or_else(|| "empty key".to_string())?;
    let mut node = root;
    for p in parents {
        node = node
            .get_mut(*p)
            .filter(|n| n.is_object())
            .ok_or_else(|| format!("unknown config section {p:?} in --{key}"))?;
    }
    match node {
        Value::Object(map) => {
            map.insert(leaf.to_string(), value);
            Ok(())
        }
        _ => Err(format!("--{key} does not name a config field")),
    }
}

pub fn load_config(src: &ConfigSources<'_>) -> Result<PipelineConfig, Failure> {
    let usage = |m: String| Failure::new(EXIT_USAGE, m);
    let mut root = serde_json::to_value(PipelineConfig::default()).expect("default config serializes");
    if let Some(path) = src.file {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let patch: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        merge(&mut root, patch);
    }
    if src.full_scale {
        root["arch"] = serde_json::to_value(ArchSpec::full_scale()).unwrap();
        root["train"]["window_len"] = FULL_SCALE_WINDOW_LEN.into();
    }
    if let Some(seed) = src.seed {
        root["split_seed"] = seed.into();
        root["train"]["seed"] = seed.into();
        root["noise"]["seed"] = seed.into();
    }
    for (key, raw) in src.overrides {
        set_dotted(&mut root, key, raw).map_err(usage)?;
    }
    let cfg: PipelineConfig = serde_json::from_value(root).map_err(|e| usage(format!("invalid config: {e}")))?;
    cfg.category_filter()?;
    Ok(cfg)
}

/// `(dotted key, raw value)` pairs from the command line.
pub type Overrides = Vec<(String, String)>;

/// Pulls `--a.b value` and `--a.b=value` pairs out of the argument list.
pub fn extract_overrides(args: Vec<String>) -> Result<(Vec<String>, Overrides), Failure> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (key, inline) = match flag.split_once('=') {
            Some((k, v)) => (k, Some(v.to_string())),
            None => (flag, None),
        };
        if !key.contains('.') {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it
                .next()
                .ok_or_else(|| Failure::new(EXIT_USAGE, format!("--{key} needs a value")))?,
        };
        overrides.push((key.to_string(), value));
    }
    Ok((rest, overrides))
}
